#pragma once

// Watertight-mesh voxelizer. For each of the three axes a ray is cast down
// every voxel column; triangle crossings are collected per column and a
// voxel center counts as inside when an odd number of crossings lies ahead
// of it. The per-axis verdicts are combined by majority vote, which rides
// out mildly degenerate geometry (a ray grazing an edge miscounts along one
// axis but rarely along two).

#include <algorithm>
#include <cstdint>
#include <vector>

#include "scope/common.hpp"
#include "scope/mesh.hpp"

namespace scope {

struct VoxelGrid {
  Vec3 origin = Vec3::Zero();  // min corner of voxel (0,0,0)
  double voxel_size = 0.0;
  Index3 dims = Index3::Zero();
  std::vector<std::uint8_t> occupancy;  // x-fastest, size = dims.prod()

  std::size_t linear(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(iy) +
                static_cast<std::size_t>(dims.y()) *
                    static_cast<std::size_t>(iz));
  }

  bool occupied(int ix, int iy, int iz) const {
    return occupancy[linear(ix, iy, iz)] != 0;
  }

  bool in_grid(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < dims.x() && iy < dims.y() &&
           iz < dims.z();
  }

  Vec3 center(int ix, int iy, int iz) const {
    return origin + voxel_size * Vec3(ix + 0.5, iy + 0.5, iz + 0.5);
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupancy) n += v;
    return n;
  }

  void check_consistent() const {
    if (voxel_size <= 0.0) throw InputError("VoxelGrid: voxel_size <= 0");
    if ((dims.array() < 1).any()) throw InputError("VoxelGrid: empty dims");
    if (occupancy.size() != static_cast<std::size_t>(dims.x()) * dims.y() * dims.z())
      throw InputError("VoxelGrid: occupancy size does not match dims");
  }
};

namespace detail {

// Crossing of the +axis ray through column center (u, v) with one triangle,
// all coordinates already projected so that `w` is the ray axis. Returns
// false for columns outside the triangle or triangles edge-on to the ray.
inline bool column_crossing(double u, double v, const Vec3& a, const Vec3& b,
                            const Vec3& c, double& w_out) {
  // a,b,c hold (u, v, w) per vertex
  const double d1u = b.x() - a.x(), d1v = b.y() - a.y();
  const double d2u = c.x() - a.x(), d2v = c.y() - a.y();
  const double det = d1u * d2v - d1v * d2u;
  if (det == 0.0) return false;
  const double pu = u - a.x(), pv = v - a.y();
  const double s = (pu * d2v - pv * d2u) / det;
  const double t = (d1u * pv - d1v * pu) / det;
  if (s < 0.0 || t < 0.0 || s + t > 1.0) return false;
  w_out = a.z() + s * (b.z() - a.z()) + t * (c.z() - a.z());
  return true;
}

}  // namespace detail

// axis_cap: per-axis limit on grid dims (including the 1-voxel empty
// border); exceeding it throws ResolutionError.
inline VoxelGrid voxelize(const TriangleMesh& mesh, double voxel_size,
                          int axis_cap = 256) {
  mesh.validate();
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw InputError("voxelize: voxel_size must be positive and finite");

  Vec3 lo, hi;
  mesh.bounds(lo, hi);

  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  grid.origin = lo - Vec3::Constant(voxel_size);
  for (int a = 0; a < 3; ++a) {
    const double span = hi[a] - lo[a];
    const int n = static_cast<int>(std::ceil(span / voxel_size)) + 2;
    if (n > axis_cap)
      throw ResolutionError("voxelize: grid dims " + std::to_string(n) +
                            " exceed cap " + std::to_string(axis_cap) +
                            " on axis " + std::to_string(a));
    grid.dims[a] = n;
  }
  grid.occupancy.assign(
      static_cast<std::size_t>(grid.dims.x()) * grid.dims.y() * grid.dims.z(),
      0);

  std::vector<std::uint8_t> votes(grid.occupancy.size(), 0);

  // Fixed sub-nanometre column offsets keep rays off mesh edges that align
  // exactly with voxel-center grid lines (e.g. quad diagonals on axis-
  // aligned boxes). Different values per in-plane axis so 45-degree edges
  // cannot realign either.
  const double ju = 0.71e-7 * voxel_size;
  const double jv = 0.37e-7 * voxel_size;

  for (int axis = 0; axis < 3; ++axis) {
    const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
    const int nu = grid.dims[ua], nv = grid.dims[va], nw = grid.dims[axis];

    std::vector<std::vector<double>> crossings(
        static_cast<std::size_t>(nu) * nv);

    for (const auto& tri : mesh.triangles) {
      Vec3 p[3];
      for (int k = 0; k < 3; ++k) {
        const Vec3& v = mesh.vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
        p[k] = Vec3(v[ua], v[va], v[axis]);
      }
      // candidate columns from the projected bounding box
      const double ulo = std::min({p[0].x(), p[1].x(), p[2].x()});
      const double uhi = std::max({p[0].x(), p[1].x(), p[2].x()});
      const double vlo = std::min({p[0].y(), p[1].y(), p[2].y()});
      const double vhi = std::max({p[0].y(), p[1].y(), p[2].y()});
      const double ou = grid.origin[ua], ov = grid.origin[va];
      int iu0 = static_cast<int>(std::floor((ulo - ou) / voxel_size - 0.5));
      int iu1 = static_cast<int>(std::ceil((uhi - ou) / voxel_size - 0.5));
      int iv0 = static_cast<int>(std::floor((vlo - ov) / voxel_size - 0.5));
      int iv1 = static_cast<int>(std::ceil((vhi - ov) / voxel_size - 0.5));
      iu0 = std::max(iu0, 0); iu1 = std::min(iu1, nu - 1);
      iv0 = std::max(iv0, 0); iv1 = std::min(iv1, nv - 1);
      for (int iv = iv0; iv <= iv1; ++iv) {
        const double cv = ov + (iv + 0.5) * voxel_size + jv;
        for (int iu = iu0; iu <= iu1; ++iu) {
          const double cu = ou + (iu + 0.5) * voxel_size + ju;
          double w;
          if (detail::column_crossing(cu, cv, p[0], p[1], p[2], w))
            crossings[static_cast<std::size_t>(iu) +
                      static_cast<std::size_t>(nu) * iv]
                .push_back(w);
        }
      }
    }

    for (int iv = 0; iv < nv; ++iv) {
      for (int iu = 0; iu < nu; ++iu) {
        auto& ws =
            crossings[static_cast<std::size_t>(iu) + static_cast<std::size_t>(nu) * iv];
        if (ws.empty()) continue;
        std::sort(ws.begin(), ws.end());
        const double ow = grid.origin[axis];
        for (int iw = 0; iw < nw; ++iw) {
          const double cw = ow + (iw + 0.5) * voxel_size;
          const auto ahead = ws.end() - std::upper_bound(ws.begin(), ws.end(), cw);
          if (ahead % 2 == 1) {
            Index3 idx;
            idx[axis] = iw; idx[ua] = iu; idx[va] = iv;
            ++votes[grid.linear(idx.x(), idx.y(), idx.z())];
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < votes.size(); ++i)
    grid.occupancy[i] = votes[i] >= 2 ? 1 : 0;
  return grid;
}

}  // namespace scope
