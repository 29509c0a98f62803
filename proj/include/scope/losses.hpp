#pragma once

// Pose-pair losses. All three compare the two arms' beliefs in the world
// frame: penetration (the solids should touch, not overlap), contact
// consistency (both contact beliefs should agree on where the touch is) and
// force alignment (the estimated contact forces should be equal and
// opposite).

#include <cmath>

#include "scope/common.hpp"
#include "scope/cpf.hpp"
#include "scope/friction_cone.hpp"
#include "scope/surface.hpp"
#include "scope/transform.hpp"

namespace scope {

struct LossMask {
  bool penetration = true;
  bool contact = true;
  bool force = true;
};

struct LossTerms {
  double penetration = 0.0;
  double contact = 0.0;
  double force = 0.0;
};

struct LossWeights {
  double eta_p = 0.005;
  double eta_c = 20.0;
  double eps_pp = 144.0;  // allowed penetration count before L_P fires
  double lambda = 1.0;    // selection softmin temperature
};

// max(0, penetrating-point-count - eps_pp)
inline double penetration_loss(const SignedDistanceField& sdf_tool,
                               const RigidTransform& tool_in_world,
                               const SurfaceModel& surface_poker,
                               const RigidTransform& poker_in_world,
                               double eps_pp) {
  const int count =
      count_penetrating(sdf_tool, tool_in_world, surface_poker, poker_in_world);
  return std::max(0.0, static_cast<double>(count) - eps_pp);
}

// sum_ij p_i t_j * ||world(p_loc_i) - world(t_loc_j)||
inline double contact_consistency_loss(const ContactParticleSet& poker_set,
                                       const ContactParticleSet& tool_set,
                                       const RigidTransform& poker_in_world,
                                       const RigidTransform& tool_in_world) {
  double loss = 0.0;
  for (const ContactParticle& p : poker_set.particles) {
    if (p.likelihood == 0.0) continue;
    const Vec3 pw = poker_in_world.apply(p.location);
    for (const ContactParticle& t : tool_set.particles) {
      loss += p.likelihood * t.likelihood * (pw - tool_in_world.apply(t.location)).norm();
    }
  }
  return loss;
}

// World-frame contact force of one particle: the QP force lives in the
// particle's contact frame, whose rotation in the world is
// R_world_object * frame_from_inward_normal(-normal).
inline Vec3 particle_world_force(const ContactParticle& particle,
                                 const RigidTransform& object_in_world) {
  const Mat3 frame = frame_from_inward_normal((-particle.normal).normalized());
  return object_in_world.rotation * (frame * particle.qp.gamma_c.force);
}

// sum_ij p_i t_j * ||-(p_F_i) - t_F_j|| over world-frame forces: zero when
// the two arms agree on an equal-and-opposite contact force.
inline double force_alignment_loss(const ContactParticleSet& poker_set,
                                   const ContactParticleSet& tool_set,
                                   const RigidTransform& poker_in_world,
                                   const RigidTransform& tool_in_world) {
  std::vector<Vec3> tool_forces;
  tool_forces.reserve(tool_set.particles.size());
  for (const ContactParticle& t : tool_set.particles)
    tool_forces.push_back(particle_world_force(t, tool_in_world));

  double loss = 0.0;
  for (const ContactParticle& p : poker_set.particles) {
    if (p.likelihood == 0.0) continue;
    const Vec3 pf = particle_world_force(p, poker_in_world);
    for (std::size_t j = 0; j < tool_set.particles.size(); ++j) {
      loss += p.likelihood * tool_set.particles[j].likelihood *
              (-pf - tool_forces[j]).norm();
    }
  }
  return loss;
}

// eta_P * L_P + eta_C * L_C + L_F, masked terms contributing zero.
inline double score_opp(const LossTerms& losses, const LossWeights& weights,
                        const LossMask& mask = {}) {
  double s = 0.0;
  if (mask.penetration) s += weights.eta_p * losses.penetration;
  if (mask.contact) s += weights.eta_c * losses.contact;
  if (mask.force) s += losses.force;
  return s;
}

}  // namespace scope
