#pragma once

// Synthetic ground-truth scenarios: a grasped poker is slid into a grasped
// tool until the surfaces touch, a contact force is drawn from the tool's
// friction cone (and checked against the poker's), and both end-effector
// wrenches are synthesised through the same contact adjoints the estimators
// use. Every filter claim in the tests is measured against scenarios built
// here.
//
// Frame layout: the tool's end effector sits at the world origin with
// identity rotation, so the tool's grasp face lies in the world x-z plane
// and its free face looks up along +y. The poker's end effector rotation
// lays the rod horizontally with its long axis along world +x and its own
// grasp face turned upward, away from the tool. The approach lowers the rod
// along roughly -y until its underside meets the tool's upper face. Keeping
// the touching faces parallel matters for estimation: the contact force
// stays inside the friction cone across a whole strip of both surfaces, so
// the wrench leaves a smooth moment gradient over each surface instead of
// being explainable only at one isolated point.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "scope/adjoint.hpp"
#include "scope/common.hpp"
#include "scope/contact_qp.hpp"
#include "scope/friction_cone.hpp"
#include "scope/grasp.hpp"
#include "scope/model.hpp"
#include "scope/nnls.hpp"
#include "scope/rng.hpp"
#include "scope/sensor_noise.hpp"
#include "scope/surface.hpp"
#include "scope/transform.hpp"
#include "scope/wrench.hpp"

namespace scope {

struct ScenarioParams {
  double mu = 0.5;
  int n_f = 8;
  double force_min = 2.0;   // N
  double force_max = 15.0;  // N
  PoseSamplingCaps caps;
  double start_y = 0.15;          // poker EE start height, world y (m)
  double aim_x = 0.035;           // aim offset range along the rod, world x (m)
  double aim_z = 0.04;            // aim offset range in world z (m)
  double tilt_max = rad(10.0);    // approach direction tilt away from -y
  double travel_limit = 0.20;     // m
  double march_step = 0.002;      // coarse contact search step (m)
  double contact_tol = 1e-4;      // slide bisection tolerance (m)
  double force_balance_tol = 1e-9;
  double face_align_min = std::cos(rad(20.0));  // contact-normal gate
  int force_retries = 20;
  int max_attempts = 50;
  bool add_noise = true;
  SensorNoise noise;

  void check() const {
    if (!(mu > 0.0)) throw InputError("ScenarioParams: mu must be positive");
    if (n_f < 3) throw InputError("ScenarioParams: n_f must be >= 3");
    if (!(force_min > 0.0) || !(force_max >= force_min))
      throw InputError("ScenarioParams: bad force magnitude range");
    if (!(march_step > 0.0) || !(contact_tol > 0.0) ||
        !(travel_limit > march_step))
      throw InputError("ScenarioParams: bad slide parameters");
    if (max_attempts < 1)
      throw InputError("ScenarioParams: max_attempts must be >= 1");
  }
};

struct Scenario {
  PlanarGraspPose poker_pose_gt;
  PlanarGraspPose tool_pose_gt;
  RigidTransform poker_ee;  // world
  RigidTransform tool_ee;   // world
  Vec3 contact_point;       // world, on the touching surfaces
  Vec3 contact_normal;      // tool outward normal, world
  Vec3 applied_force;       // force on the tool, world (N)
  Wrench wrench_poker;      // measured (noisy when enabled), poker EE frame
  Wrench wrench_tool;       // measured, tool EE frame
  Wrench wrench_poker_clean;
  Wrench wrench_tool_clean;

  // Generative bookkeeping, object frames; the snapped contact points and
  // outward normals each arm's wrench was synthesised from.
  Vec3 poker_point_obj;
  Vec3 poker_normal_obj;
  Vec3 tool_point_obj;
  Vec3 tool_normal_obj;
  VecX alpha_poker;  // cone activations behind each clean wrench
  VecX alpha_tool;

  RigidTransform poker_in_world() const {
    return poker_ee * poker_pose_gt.transform();
  }
  RigidTransform tool_in_world() const {
    return tool_ee * tool_pose_gt.transform();
  }
};

namespace detail {

// Smallest tool-frame SDF value over the poker's surface points, or +inf
// when every point lands outside the sampleable tool grid.
inline double min_tool_sdf(const SignedDistanceField& sdf_tool,
                           const RigidTransform& tool_to_poker_rel,
                           const SurfaceModel& surface_poker,
                           int* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < surface_poker.points.size(); ++i) {
    const Vec3 q = tool_to_poker_rel.apply(surface_poker.points[i].position);
    const auto v = sdf_tool.try_sample(q);
    if (v && *v < best) {
      best = *v;
      if (argmin) *argmin = static_cast<int>(i);
    }
  }
  return best;
}

// EE wrench produced by a pure contact force expressed as cone activations,
// assembled with the same frame and adjoint constructions the scoring QP
// uses so a noiseless scenario is exactly representable there.
inline Wrench wrench_from_contact(const RigidTransform& object_in_ee,
                                  const Vec3& point_obj,
                                  const Vec3& outward_normal_obj,
                                  const VecX& alpha, double mu,
                                  const std::string& ee_frame) {
  const FrictionCone cone_obj = build_friction_cone(
      point_obj, outward_normal_obj, mu, static_cast<int>(alpha.size()));
  const Mat3 tangent_frame = frame_from_inward_normal(cone_obj.normal);

  RigidTransform contact_in_ee;
  contact_in_ee.rotation = object_in_ee.rotation * tangent_frame;
  contact_in_ee.translation = object_in_ee.apply(point_obj);
  const ContactAdjoint adj =
      contact_adjoint(contact_in_ee.inverse(), "contact", ee_frame);

  const auto edges_c = cone_edges_in_frame(cone_obj, tangent_frame);
  Vec3 force_c = Vec3::Zero();
  for (int j = 0; j < alpha.size(); ++j)
    force_c += alpha[j] * edges_c[static_cast<std::size_t>(j)];

  const Wrench gamma_c(force_c, Vec3::Zero(), "contact");
  return Wrench::from_stacked(adj.matrix * gamma_c.stacked(), ee_frame);
}

}  // namespace detail

inline Wrench add_wrench_noise(const Wrench& clean, const SensorNoise& noise,
                               Rng& rng) {
  Vec6 v = clean.stacked();
  for (int i = 0; i < 6; ++i)
    v[i] += rng.normal(0.0, std::sqrt(noise.variance[i]));
  return Wrench::from_stacked(v, clean.frame);
}

// Builds one scenario or throws ScenarioError after the attempt budget.
// Geometry attempts resample grasp poses and the approach until the slide
// actually reaches the tool and the drawn contact force is transmissible
// through both friction cones.
inline Scenario generate_scenario(const ObjectModel& poker,
                                  const ObjectModel& tool,
                                  const GripperSpec& poker_gripper,
                                  const GripperSpec& tool_gripper,
                                  const ScenarioParams& params, Rng& rng) {
  params.check();
  if (poker.surface.points.empty() || tool.surface.points.empty())
    throw InputError("generate_scenario: models must be preprocessed");

  const SurfaceIndex tool_index(tool.surface);
  const Mat3 poker_ee_rot = rotation_x(rad(180.0)) * rotation_y(rad(90.0));

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Scenario sc;
    sc.tool_pose_gt = sample_grasp_poses(tool.surface, tool_gripper, 1,
                                         params.caps, rng)[0];
    sc.poker_pose_gt = sample_grasp_poses(poker.surface, poker_gripper, 1,
                                          params.caps, rng)[0];
    sc.tool_ee = RigidTransform::identity();

    const double aim_x = rng.uniform(-params.aim_x, params.aim_x);
    const double aim_z = rng.uniform(-params.aim_z, params.aim_z);
    const double tilt_x = std::tan(rng.uniform(-params.tilt_max, params.tilt_max));
    const double tilt_z = std::tan(rng.uniform(-params.tilt_max, params.tilt_max));
    const Vec3 slide_dir = Vec3(tilt_x, -1.0, tilt_z).normalized();
    const Vec3 start(aim_x, params.start_y, aim_z);

    const RigidTransform tool_world = sc.tool_pose_gt.transform();
    const RigidTransform poker_inhand = sc.poker_pose_gt.transform();
    const auto poker_world_at = [&](double travel) {
      RigidTransform ee;
      ee.rotation = poker_ee_rot;
      ee.translation = start + travel * slide_dir;
      return ee * poker_inhand;
    };
    const auto min_sdf_at = [&](double travel, int* argmin = nullptr) {
      const RigidTransform rel =
          tool_world.inverse() * poker_world_at(travel);
      return detail::min_tool_sdf(tool.sdf, rel, poker.surface, argmin);
    };

    // coarse march until the poker first dips below the tool surface
    double s_lo = 0.0;
    double s_hi = -1.0;
    if (min_sdf_at(0.0) <= 0.0) continue;  // started in contact; bad draw
    for (double s = params.march_step; s <= params.travel_limit;
         s += params.march_step) {
      if (min_sdf_at(s) <= 0.0) {
        s_lo = s - params.march_step;
        s_hi = s;
        break;
      }
    }
    if (s_hi < 0.0) continue;  // never reached the tool

    while (s_hi - s_lo > params.contact_tol) {
      const double mid = 0.5 * (s_lo + s_hi);
      if (min_sdf_at(mid) <= 0.0)
        s_hi = mid;
      else
        s_lo = mid;
    }

    int poker_idx = -1;
    min_sdf_at(s_hi, &poker_idx);
    if (poker_idx < 0) continue;

    const RigidTransform poker_world = poker_world_at(s_hi);
    sc.poker_ee.rotation = poker_ee_rot;
    sc.poker_ee.translation = start + s_hi * slide_dir;

    sc.poker_point_obj = poker.surface.points[static_cast<std::size_t>(poker_idx)].position;
    sc.poker_normal_obj = poker.surface.points[static_cast<std::size_t>(poker_idx)].normal;
    sc.contact_point = poker_world.apply(sc.poker_point_obj);

    const Vec3 tool_local = tool_world.inverse().apply(sc.contact_point);
    const int tool_idx = tool_index.nearest(tool_local);
    sc.tool_point_obj = tool.surface.points[static_cast<std::size_t>(tool_idx)].position;
    sc.tool_normal_obj = tool.surface.points[static_cast<std::size_t>(tool_idx)].normal;
    sc.contact_normal = tool_world.rotate(sc.tool_normal_obj);

    // Keep only flat-on-face touches: the rod's underside against the
    // tool's upward face. Glancing contacts at ends, ridges or corners get
    // redrawn; their blended normals would put the contact force outside
    // every nearby face cone, which no estimator can recover from.
    if (sc.poker_normal_obj.y() < params.face_align_min) continue;
    if (sc.tool_normal_obj.y() < params.face_align_min) continue;

    // force on the tool, drawn inside its cone; the poker must be able to
    // transmit the reaction through its own cone or we redraw
    const FrictionCone cone_tool = build_friction_cone(
        sc.tool_point_obj, sc.tool_normal_obj, params.mu, params.n_f);
    const FrictionCone cone_poker = build_friction_cone(
        sc.poker_point_obj, sc.poker_normal_obj, params.mu, params.n_f);

    MatX edges_poker(3, params.n_f);
    for (int j = 0; j < params.n_f; ++j)
      edges_poker.col(j) = cone_poker.edges[static_cast<std::size_t>(j)];

    bool force_ok = false;
    for (int ftry = 0; ftry < params.force_retries && !force_ok; ++ftry) {
      VecX coeff(params.n_f);
      for (int j = 0; j < params.n_f; ++j) coeff[j] = rng.uniform();
      Vec3 dir_obj = Vec3::Zero();
      for (int j = 0; j < params.n_f; ++j)
        dir_obj += coeff[j] * cone_tool.edges[static_cast<std::size_t>(j)];
      const double norm = dir_obj.norm();
      if (norm < 1e-12) continue;
      const double magnitude =
          rng.uniform(params.force_min, params.force_max);
      sc.alpha_tool = coeff * (magnitude / norm);
      const Vec3 force_tool_obj = dir_obj * (magnitude / norm);

      sc.applied_force = tool_world.rotate(force_tool_obj);
      const Vec3 reaction_poker_obj =
          poker_world.rotation.transpose() * (-sc.applied_force);
      const NnlsResult member = nnls(edges_poker, reaction_poker_obj);
      if (std::sqrt(member.objective) <=
          params.force_balance_tol * std::max(1.0, magnitude)) {
        sc.alpha_poker = member.x;
        force_ok = true;
      }
    }
    if (!force_ok) continue;

    sc.wrench_tool_clean = detail::wrench_from_contact(
        sc.tool_pose_gt.transform(), sc.tool_point_obj, sc.tool_normal_obj,
        sc.alpha_tool, params.mu, "tool_ee");
    sc.wrench_poker_clean = detail::wrench_from_contact(
        poker_inhand, sc.poker_point_obj, sc.poker_normal_obj,
        sc.alpha_poker, params.mu, "poker_ee");

    if (params.add_noise) {
      sc.wrench_tool = add_wrench_noise(sc.wrench_tool_clean, params.noise, rng);
      sc.wrench_poker = add_wrench_noise(sc.wrench_poker_clean, params.noise, rng);
    } else {
      sc.wrench_tool = sc.wrench_tool_clean;
      sc.wrench_poker = sc.wrench_poker_clean;
    }
    return sc;
  }
  throw ScenarioError("generate_scenario: no valid contact scenario within " +
                      std::to_string(params.max_attempts) + " attempts");
}

}  // namespace scope
