#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "scope/common.hpp"

namespace scope {

struct TriangleMesh {
  std::vector<Vec3> vertices;                  // metres
  std::vector<std::array<int, 3>> triangles;   // indices into vertices

  std::size_t triangle_count() const { return triangles.size(); }

  double triangle_area(std::size_t t) const {
    const Vec3& a = vertices[static_cast<std::size_t>(triangles[t][0])];
    const Vec3& b = vertices[static_cast<std::size_t>(triangles[t][1])];
    const Vec3& c = vertices[static_cast<std::size_t>(triangles[t][2])];
    return 0.5 * (b - a).cross(c - a).norm();
  }

  // Indices in range, vertices finite, no degenerate triangles.
  void validate() const {
    if (vertices.empty() || triangles.empty())
      throw InvalidMeshError("mesh has no geometry");
    for (const Vec3& v : vertices)
      if (!v.allFinite())
        throw InvalidMeshError("mesh has non-finite vertex");
    const int n = static_cast<int>(vertices.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        const int i = triangles[t][k];
        if (i < 0 || i >= n)
          throw InvalidMeshError("triangle index out of range");
      }
      if (triangle_area(t) <= 0.0)
        throw InvalidMeshError("degenerate (zero-area) triangle");
    }
  }

  void bounds(Vec3& lo, Vec3& hi) const {
    if (vertices.empty()) throw InvalidMeshError("mesh has no vertices");
    lo = hi = vertices.front();
    for (const Vec3& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
};

// Divergence-theorem volume. Positive for a closed mesh with outward-facing
// triangles, so it doubles as an orientation check.
inline double signed_volume(const TriangleMesh& mesh) {
  double six_v = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

}  // namespace scope
