#pragma once

// Polyhedral friction cone around the inward (pushing) normal, plus the
// deterministic tangent frame shared by everything that expresses contact
// quantities. Scenario generation, particle scoring and the loss terms all
// build their frames through frame_from_inward_normal(), so a force sampled
// from a cone in one frame is exactly representable in any of the others.

#include <cmath>
#include <vector>

#include "scope/common.hpp"
#include "scope/transform.hpp"

namespace scope {

// Right-handed frame [t1 t2 n] whose z axis is the given unit vector.
// t1 = normalize(n x e) with e the coordinate axis least aligned with n
// (lowest index wins ties), t2 = n x t1.
inline Mat3 frame_from_inward_normal(const Vec3& n_in) {
  if (!n_in.allFinite() || std::abs(n_in.norm() - 1.0) > 1e-6)
    throw InputError("frame_from_inward_normal: normal must be unit length");
  int least = 0;
  double best = std::abs(n_in.x());
  if (std::abs(n_in.y()) < best) { least = 1; best = std::abs(n_in.y()); }
  if (std::abs(n_in.z()) < best) { least = 2; }
  const Vec3 e = Vec3::Unit(least);
  const Vec3 t1 = n_in.cross(e).normalized();
  const Vec3 t2 = n_in.cross(t1);
  Mat3 f;
  f.col(0) = t1;
  f.col(1) = t2;
  f.col(2) = n_in;
  return f;
}

struct FrictionCone {
  Vec3 apex = Vec3::Zero();    // contact point, caller's frame
  Vec3 normal = Vec3::Zero();  // unit inward (pushing) direction
  double mu = 0.5;
  std::vector<Vec3> edges;     // unit vectors, same frame as normal
};

// Edges at half-angle atan(mu) around the inward normal (-outward), azimuths
// uniform with phase 0 along the deterministic tangent t1.
inline FrictionCone build_friction_cone(const Vec3& contact_point,
                                        const Vec3& outward_normal,
                                        double mu, int n_f) {
  if (!contact_point.allFinite() || !outward_normal.allFinite())
    throw InputError("build_friction_cone: non-finite input");
  if (std::abs(outward_normal.norm() - 1.0) > 1e-6)
    throw InputError("build_friction_cone: outward normal must be unit");
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw InputError("build_friction_cone: mu must be finite and >= 0");
  if (n_f < 3) throw InputError("build_friction_cone: need at least 3 edges");

  FrictionCone cone;
  cone.apex = contact_point;
  cone.normal = -outward_normal;
  cone.mu = mu;

  const Mat3 frame = frame_from_inward_normal(cone.normal);
  const double beta = std::atan(mu);
  const double s = std::sin(beta), c = std::cos(beta);
  cone.edges.reserve(static_cast<std::size_t>(n_f));
  for (int k = 0; k < n_f; ++k) {
    const double phi = 2.0 * M_PI * static_cast<double>(k) / n_f;
    cone.edges.push_back(frame *
                         Vec3(s * std::cos(phi), s * std::sin(phi), c));
  }
  return cone;
}

// Same cone expressed in its own contact frame (z = inward normal): the
// matrix product below reduces to a canonical z-aligned cone, but computing
// it literally keeps generation and scoring paths bit-identical.
inline std::vector<Vec3> cone_edges_in_frame(const FrictionCone& cone,
                                             const Mat3& frame) {
  std::vector<Vec3> out;
  out.reserve(cone.edges.size());
  for (const Vec3& e : cone.edges) out.push_back(frame.transpose() * e);
  return out;
}

}  // namespace scope
