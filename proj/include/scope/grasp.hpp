#pragma once

// In-hand pose parameterisation: the grasped object can slide and spin in
// the end-effector's x-z plane, [x, z, theta], with theta about the EE
// y axis. A pose is grasp-valid when some surface point of the moved object
// still lies within the gripper tolerance of the finger center.

#include <cmath>
#include <vector>

#include "scope/common.hpp"
#include "scope/rng.hpp"
#include "scope/surface.hpp"
#include "scope/transform.hpp"

namespace scope {

struct PlanarGraspPose {
  double x = 0.0;      // metres, EE frame
  double z = 0.0;      // metres, EE frame
  double theta = 0.0;  // radians about EE y

  RigidTransform transform() const {
    RigidTransform t;
    t.rotation = rotation_y(theta);
    t.translation = Vec3(x, 0.0, z);
    return t;
  }
};

struct GripperSpec {
  Vec3 finger_center = Vec3::Zero();  // EE frame
  double tolerance = 1e-3;            // metres, inclusive
};

struct PoseSamplingCaps {
  double t_max = 0.03;           // metres, |x| and |z| bound
  double r_max = rad(45.0);      // radians, |theta| bound
};

inline double planar_translation_error(const PlanarGraspPose& a,
                                       const PlanarGraspPose& b) {
  const double dx = a.x - b.x, dz = a.z - b.z;
  return std::sqrt(dx * dx + dz * dz);
}

// |dtheta| wrapped into [0, pi].
inline double planar_rotation_error(const PlanarGraspPose& a,
                                    const PlanarGraspPose& b) {
  double d = std::fmod(std::abs(a.theta - b.theta), 2.0 * M_PI);
  if (d > M_PI) d = 2.0 * M_PI - d;
  return d;
}

// True when min over transformed surface points of the distance to the
// finger center is <= tolerance (inclusive).
inline bool grasp_validity(const PlanarGraspPose& pose,
                           const SurfaceModel& surface,
                           const GripperSpec& gripper) {
  if (surface.points.empty())
    throw InputError("grasp_validity: empty surface");
  if (gripper.tolerance < 0.0) return false;  // squaring would hide the sign
  const RigidTransform t = pose.transform();
  const double tol2 = gripper.tolerance * gripper.tolerance;
  for (const SurfacePoint& pt : surface.points) {
    if ((t.apply(pt.position) - gripper.finger_center).squaredNorm() <= tol2)
      return true;
  }
  return false;
}

// Rejection-samples n grasp-valid poses uniformly within the caps around
// `center` (the nominal grasp by default; zero caps collapse the draw onto
// the center). The attempt budget is per pose; exhausting it throws
// InfeasibleGraspError.
inline std::vector<PlanarGraspPose> sample_grasp_poses(
    const SurfaceModel& surface, const GripperSpec& gripper, int n,
    const PoseSamplingCaps& caps, Rng& rng,
    const PlanarGraspPose& center = {}, int max_attempts_per_pose = 10000) {
  if (n < 1) throw InputError("sample_grasp_poses: n must be >= 1");
  std::vector<PlanarGraspPose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    bool found = false;
    for (int attempt = 0; attempt < max_attempts_per_pose; ++attempt) {
      PlanarGraspPose pose;
      pose.x = center.x + rng.uniform(-caps.t_max, caps.t_max);
      pose.z = center.z + rng.uniform(-caps.t_max, caps.t_max);
      pose.theta = center.theta + rng.uniform(-caps.r_max, caps.r_max);
      if (grasp_validity(pose, surface, gripper)) {
        poses.push_back(pose);
        found = true;
        break;
      }
    }
    if (!found)
      throw InfeasibleGraspError(
          "sample_grasp_poses: no valid pose within attempt budget");
  }
  return poses;
}

}  // namespace scope
