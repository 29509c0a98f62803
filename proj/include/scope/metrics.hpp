#pragma once

// Error metrics for planar in-hand poses. Translation errors are reported
// in centimetres and rotation errors in degrees wrapped to [0, 180]; the
// aggregate score folds rotations back to radians via per-object radii of
// gyration so everything lands in centimetres.

#include <cmath>

#include "scope/common.hpp"
#include "scope/grasp.hpp"

namespace scope {

struct PoseErrors {
  double translation_cm = 0.0;
  double rotation_deg = 0.0;
};

inline PoseErrors pose_errors(const PlanarGraspPose& estimate,
                              const PlanarGraspPose& truth) {
  PoseErrors e;
  e.translation_cm = planar_translation_error(estimate, truth) * 100.0;
  e.rotation_deg = deg(planar_rotation_error(estimate, truth));
  return e;
}

// E = t_p + t_t + r_gp * rot_p + r_gt * rot_t, translations and radii of
// gyration in cm, rotations in radians.
inline double aggregate_error(double trans_poker_cm, double rot_poker_rad,
                              double trans_tool_cm, double rot_tool_rad,
                              double r_g_poker_cm = 5.25,
                              double r_g_tool_cm = 5.0) {
  return trans_poker_cm + trans_tool_cm + r_g_poker_cm * rot_poker_rad +
         r_g_tool_cm * rot_tool_rad;
}

inline double aggregate_error(const PoseErrors& poker, const PoseErrors& tool,
                              double r_g_poker_cm = 5.25,
                              double r_g_tool_cm = 5.0) {
  return aggregate_error(poker.translation_cm, rad(poker.rotation_deg),
                         tool.translation_cm, rad(tool.rotation_deg),
                         r_g_poker_cm, r_g_tool_cm);
}

}  // namespace scope
