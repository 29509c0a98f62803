#pragma once

// Built-in object meshes for the synthetic scenarios. All three place their
// grasp reference point at the origin, on a flat face lying in the y = 0
// plane, so an identity in-hand pose is a valid grasp once the finger center
// is snapped to the surface.

#include <cmath>
#include <string>

#include "scope/common.hpp"
#include "scope/mesh.hpp"
#include "scope/model.hpp"

namespace scope {

// Axis-aligned box between two corners, 12 outward-facing triangles.
inline TriangleMesh make_box_mesh(const Vec3& lo, const Vec3& hi) {
  if (!((hi.array() > lo.array()).all()))
    throw InputError("make_box_mesh: hi must exceed lo on every axis");
  TriangleMesh mesh;
  for (int k = 0; k < 8; ++k)
    mesh.vertices.push_back(Vec3(k & 1 ? hi.x() : lo.x(),
                                 k & 2 ? hi.y() : lo.y(),
                                 k & 4 ? hi.z() : lo.z()));
  const int quads[6][4] = {
      {0, 4, 6, 2},  // x = lo
      {1, 3, 7, 5},  // x = hi
      {0, 1, 5, 4},  // y = lo
      {2, 6, 7, 3},  // y = hi
      {0, 2, 3, 1},  // z = lo
      {4, 5, 7, 6},  // z = hi
  };
  for (const auto& q : quads) {
    mesh.triangles.push_back({q[0], q[1], q[2]});
    mesh.triangles.push_back({q[0], q[2], q[3]});
  }
  return mesh;
}

// L-shaped hexagonal prism. Cross-section is a regular hexagon of inradius
// 0.5 cm with two faces normal to y, centered at y = +0.5 cm so the bottom
// face lies in y = 0. The long arm runs along z from +1.5 cm down to the
// elbow near z = -3.5 cm; the short arm runs along +x out to x = +3 cm. The
// arms meet in a miter on the plane z = x - 3.5 cm, sharing one vertex ring,
// which keeps the mesh watertight. Enclosed volume is
// 2*sqrt(3)*r^2*(5 cm + 3 cm) = 6.928 cm^3.
inline TriangleMesh builtin_hex_key_mesh() {
  const double r = 0.005;                    // hexagon inradius
  const double big_r = 2.0 * r / std::sqrt(3.0);  // circumradius
  const double cy = 0.005;                   // centerline height
  const double z_top = 0.015;
  const double elbow = -0.035;               // miter plane is z = x + elbow
  const double x_tip = 0.03;

  const double hex[6][2] = {
      {big_r, 0.0},           {0.5 * big_r, r},  {-0.5 * big_r, r},
      {-big_r, 0.0},          {-0.5 * big_r, -r}, {0.5 * big_r, -r},
  };

  TriangleMesh mesh;
  for (int k = 0; k < 6; ++k)  // top ring, flat cap at z_top
    mesh.vertices.push_back(Vec3(hex[k][0], cy + hex[k][1], z_top));
  for (int k = 0; k < 6; ++k)  // shared miter ring, z = x + elbow
    mesh.vertices.push_back(Vec3(hex[k][0], cy + hex[k][1], hex[k][0] + elbow));
  for (int k = 0; k < 6; ++k)  // tip ring, flat cap at x_tip
    mesh.vertices.push_back(Vec3(x_tip, cy + hex[k][1], hex[k][0] + elbow));

  const auto top = [](int k) { return k; };
  const auto mit = [](int k) { return 6 + k; };
  const auto tip = [](int k) { return 12 + k; };

  for (int k = 2; k < 6; ++k)  // top cap, outward +z
    mesh.triangles.push_back({top(0), top(k - 1), top(k)});
  for (int k = 2; k < 6; ++k)  // tip cap, outward +x
    mesh.triangles.push_back({tip(0), tip(k), tip(k - 1)});
  for (int k = 0; k < 6; ++k) {
    const int j = (k + 1) % 6;
    mesh.triangles.push_back({top(k), mit(k), mit(j)});  // long-arm wall
    mesh.triangles.push_back({top(k), mit(j), top(j)});
    mesh.triangles.push_back({mit(k), tip(k), tip(j)});  // short-arm wall
    mesh.triangles.push_back({mit(k), tip(j), mit(j)});
  }
  return mesh;
}

// Box wrench stand-in: 2.5 cm (x) by 1 cm (y) by 10 cm (z).
inline TriangleMesh builtin_wrench_mesh() {
  return make_box_mesh(Vec3(-0.0125, 0.0, -0.05), Vec3(0.0125, 0.01, 0.05));
}

// Poker rod: 1 cm square shaft running along z, ending in a 4 cm pyramidal
// taper to a point at z = -10 cm. The taper matters: its normals fan from
// radial to axial, so near-axial poke forces are cone-feasible over a broad
// patch around the point instead of only at a cap edge. The back end is cut
// on a steep bevel rather than square: a flat back cap would admit the same
// axial force as the point while sitting on its line of action, an exact
// wrench ambiguity, whereas the bevel normal lies outside the friction cone
// of any near-axial push.
inline TriangleMesh builtin_poker_mesh() {
  const double r = 0.005;       // half width of the square section
  const double z_back_hi = 0.03;  // back bevel, y = 0 edge
  const double z_back_lo = 0.01;  // back bevel, y = 2r edge
  const double z_joint = -0.06;  // shaft-to-taper transition
  const double z_apex = -0.10;

  TriangleMesh mesh;
  mesh.vertices.push_back(Vec3(-r, 0.0, z_back_hi));
  mesh.vertices.push_back(Vec3(r, 0.0, z_back_hi));
  mesh.vertices.push_back(Vec3(r, 2.0 * r, z_back_lo));
  mesh.vertices.push_back(Vec3(-r, 2.0 * r, z_back_lo));
  mesh.vertices.push_back(Vec3(-r, 0.0, z_joint));
  mesh.vertices.push_back(Vec3(r, 0.0, z_joint));
  mesh.vertices.push_back(Vec3(r, 2.0 * r, z_joint));
  mesh.vertices.push_back(Vec3(-r, 2.0 * r, z_joint));
  mesh.vertices.push_back(Vec3(0.0, r, z_apex));  // index 8

  mesh.triangles.push_back({0, 1, 2});  // beveled back cap
  mesh.triangles.push_back({0, 2, 3});
  const int walls[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  for (const auto& w : walls) {
    const int a = w[0], b = w[1];
    mesh.triangles.push_back({a, a + 4, b + 4});
    mesh.triangles.push_back({a, b + 4, b});
    mesh.triangles.push_back({a + 4, 8, b + 4});  // taper face to the apex
  }
  return mesh;
}

inline bool is_builtin_model_name(const std::string& name) {
  return name == "hex_key" || name == "wrench" || name == "poker";
}

inline TriangleMesh builtin_mesh(const std::string& name) {
  if (name == "hex_key") return builtin_hex_key_mesh();
  if (name == "wrench") return builtin_wrench_mesh();
  if (name == "poker") return builtin_poker_mesh();
  throw InputError("unknown builtin model: " + name);
}

inline double builtin_radius_of_gyration_cm(const std::string& name) {
  return name == "poker" ? 5.25 : 5.0;
}

inline ObjectModel load_builtin_model(const std::string& name,
                                      double voxel_size = 0.002) {
  ObjectModel model = preprocess_model(name, builtin_mesh(name), voxel_size);
  model.radius_of_gyration_cm = builtin_radius_of_gyration_cm(name);
  return model;
}

}  // namespace scope
