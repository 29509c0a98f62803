#pragma once

// Mesh loaders: ASCII OBJ (v/f lines, triangles only) and binary STL.
// Parse failures throw ParseError with the offending line; STL structural
// problems throw InvalidMeshError.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scope/common.hpp"
#include "scope/mesh.hpp"

namespace scope {

inline TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidMeshError("cannot open OBJ file: " + path);

  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;  // blank line
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z()))
        throw ParseError("OBJ vertex needs three coordinates", line_no);
      if (!v.allFinite())
        throw ParseError("OBJ vertex has non-finite coordinate", line_no);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      std::string tok;
      int count = 0;
      while (ss >> tok) {
        if (count >= 3)
          throw ParseError("OBJ face is not a triangle", line_no);
        // accept "i", "i/t", "i/t/n", "i//n": index is the leading field
        const std::size_t slash = tok.find('/');
        if (slash != std::string::npos) tok = tok.substr(0, slash);
        int idx = 0;
        try {
          idx = std::stoi(tok);
        } catch (const std::exception&) {
          throw ParseError("OBJ face index is not an integer", line_no);
        }
        if (idx < 1 || idx > static_cast<int>(mesh.vertices.size()))
          throw ParseError("OBJ face index out of range", line_no);
        tri[static_cast<std::size_t>(count++)] = idx - 1;
      }
      if (count != 3)
        throw ParseError("OBJ face is not a triangle", line_no);
      mesh.triangles.push_back(tri);
    }
    // other tags (vn, vt, o, g, s, usemtl, #) are ignored
  }
  mesh.validate();
  return mesh;
}

inline void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw Error("write failed: " + path);
}

namespace detail {

struct Vec3Less {
  bool operator()(const Vec3& a, const Vec3& b) const {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
  }
};

}  // namespace detail

// Binary STL: 80-byte header, u32 triangle count, then 50-byte records
// (12 f32 for normal+vertices, u16 attribute). Exactly coincident vertices
// are welded. Zero-area triangles are dropped (they contribute nothing to
// ray parity and would violate the mesh invariant).
inline TriangleMesh load_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidMeshError("cannot open STL file: " + path);

  char header[80];
  in.read(header, 80);
  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw InvalidMeshError("STL file truncated in header: " + path);
  if (std::strncmp(header, "solid ", 6) == 0) {
    // could still be binary; verify the record length against file size
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::uint64_t>(in.tellg());
    if (size != 84ull + 50ull * count)
      throw InvalidMeshError("ASCII STL is not supported: " + path);
    in.seekg(84);
  }

  TriangleMesh mesh;
  std::map<Vec3, int, detail::Vec3Less> weld;
  auto vertex_index = [&](const Vec3& v) {
    auto [it, inserted] =
        weld.try_emplace(v, static_cast<int>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(v);
    return it->second;
  };

  for (std::uint32_t t = 0; t < count; ++t) {
    float rec[12];
    in.read(reinterpret_cast<char*>(rec), 48);
    char attr[2];
    in.read(attr, 2);
    if (!in)
      throw InvalidMeshError("STL file truncated at triangle " +
                             std::to_string(t) + ": " + path);
    std::array<int, 3> tri{};
    Vec3 p[3];
    for (int k = 0; k < 3; ++k) {
      p[k] = Vec3(rec[3 + 3 * k], rec[4 + 3 * k], rec[5 + 3 * k]);
      if (!p[k].allFinite())
        throw InvalidMeshError("STL has non-finite vertex at triangle " +
                               std::to_string(t) + ": " + path);
    }
    if (0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm() <= 0.0) continue;
    for (int k = 0; k < 3; ++k) tri[static_cast<std::size_t>(k)] = vertex_index(p[k]);
    mesh.triangles.push_back(tri);
  }
  mesh.validate();
  return mesh;
}

// Dispatch on extension (.obj / .stl, case-insensitive).
inline TriangleMesh load_mesh(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const std::size_t n = std::strlen(ext);
    if (path.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i) {
      const char a = path[path.size() - n + i];
      const char b = ext[i];
      if (std::tolower(static_cast<unsigned char>(a)) != b) return false;
    }
    return true;
  };
  if (ends_with(".obj")) return load_obj(path);
  if (ends_with(".stl")) return load_stl(path);
  throw InvalidMeshError("unsupported mesh extension (want .obj or .stl): " +
                         path);
}

}  // namespace scope
