#pragma once

// JSON-lines run records: one line per filter iteration (or per particle
// set), enough to re-render convergence plots offline. Masked or unknown
// values are NaN in memory and serialise as null.

#include <ostream>

#include <json.hpp>

#include "scope/cpf.hpp"
#include "scope/scope_filter.hpp"

namespace scope {

inline nlohmann::json to_json(const PlanarGraspPose& pose) {
  return nlohmann::json{{"x", pose.x}, {"z", pose.z}, {"theta", pose.theta}};
}

inline nlohmann::json to_json(const ScopeIterationRecord& rec) {
  nlohmann::json j;
  j["iteration"] = rec.iteration;
  j["scored_pairs"] = rec.scored_pairs;
  j["loss_penetration"] = rec.mean_losses.penetration;
  j["loss_contact"] = rec.mean_losses.contact;
  j["loss_force"] = rec.mean_losses.force;
  j["score"] = rec.mean_score;
  j["survivors"] = rec.survivors;
  nlohmann::json pokers = nlohmann::json::array();
  nlohmann::json tools = nlohmann::json::array();
  for (const auto& p : rec.poker_poses) pokers.push_back(to_json(p));
  for (const auto& p : rec.tool_poses) tools.push_back(to_json(p));
  j["poker_poses"] = pokers;
  j["tool_poses"] = tools;
  j["mean_trans_poker_cm"] = rec.mean_trans_poker_cm;
  j["mean_rot_poker_deg"] = rec.mean_rot_poker_deg;
  j["mean_trans_tool_cm"] = rec.mean_trans_tool_cm;
  j["mean_rot_tool_deg"] = rec.mean_rot_tool_deg;
  j["mean_e_agg_cm"] = rec.mean_e_agg;
  return j;
}

inline nlohmann::json to_json(const ContactParticleSet& set) {
  nlohmann::json particles = nlohmann::json::array();
  for (const auto& p : set.particles) {
    particles.push_back(nlohmann::json{
        {"location", {p.location.x(), p.location.y(), p.location.z()}},
        {"normal", {p.normal.x(), p.normal.y(), p.normal.z()}},
        {"likelihood", p.likelihood},
        {"residual", p.qp.residual},
    });
  }
  return nlohmann::json{{"particles", particles}};
}

inline void write_scope_history(std::ostream& out,
                                const std::vector<ScopeIterationRecord>& history) {
  for (const auto& rec : history) out << to_json(rec).dump() << "\n";
}

}  // namespace scope
