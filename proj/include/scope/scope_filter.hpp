#pragma once

// Outer particle filter over pairs of in-hand poses (poker, tool). Each
// iteration perturbs the pose particles in the grasp plane, reruns the
// contact filter once per pose per arm, scores every poker x tool pose
// combination with the pairwise losses, and keeps the best combinations by
// truncation plus softmin-weighted systematic resampling.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "scope/common.hpp"
#include "scope/cpf.hpp"
#include "scope/grasp.hpp"
#include "scope/losses.hpp"
#include "scope/metrics.hpp"
#include "scope/model.hpp"
#include "scope/resample.hpp"
#include "scope/rng.hpp"

namespace scope {

struct PosePairParticle {
  PlanarGraspPose poker;
  PlanarGraspPose tool;
  ContactParticleSet poker_contacts;
  ContactParticleSet tool_contacts;
  LossTerms losses;  // masked-off terms stay NaN
  double score = std::numeric_limits<double>::quiet_NaN();
};

struct ScopeParams {
  int n_opp = 10;  // pose particles per arm
  int n_os = 10;   // outer iterations
  CpfParams cpf;   // inner contact filter settings
  LossWeights weights;
  LossMask mask;
  PoseSamplingCaps caps;
  Vec3 pose_sigma = Vec3(0.003, 0.003, rad(3.0));  // x, z, theta noise
  PlanarGraspPose init_center_poker;
  PlanarGraspPose init_center_tool;
  int noise_redraws = 20;  // validity retries before keeping a pose as-is

  ScopeParams() {
    cpf.n_clp = 20;
    cpf.n_cs = 30;
  }

  void check() const {
    if (n_opp < 1) throw InputError("ScopeParams: n_opp must be >= 1");
    if (n_os < 0) throw InputError("ScopeParams: n_os must be >= 0");
    if (!(weights.lambda > 0.0))
      throw InputError("ScopeParams: lambda must be positive");
    if (!(pose_sigma.array() >= 0.0).all())
      throw InputError("ScopeParams: pose noise must be >= 0");
    cpf.check();
  }
};

// Everything run_scope needs to know about one arm.
struct ScopeArmInput {
  const ObjectModel* model = nullptr;
  GripperSpec gripper;
  RigidTransform ee_in_world;
  Wrench wrench;  // measured EE wrench
  SensorNoise noise;

  void check(const char* who) const {
    if (model == nullptr)
      throw InputError(std::string(who) + ": missing object model");
    ee_in_world.check(who);
  }
};

struct GroundTruthPoses {
  PlanarGraspPose poker;
  PlanarGraspPose tool;
};

struct ScopeIterationRecord {
  int iteration = 0;
  int scored_pairs = 0;
  LossTerms mean_losses;  // over all scored pairs (NaN where masked)
  double mean_score = 0.0;
  std::vector<std::size_t> survivors;  // indices into the scored-pair list
  std::vector<PlanarGraspPose> poker_poses;  // survivors, post-selection
  std::vector<PlanarGraspPose> tool_poses;
  // vs ground truth, NaN when truth was not supplied
  double mean_trans_poker_cm = std::numeric_limits<double>::quiet_NaN();
  double mean_rot_poker_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_trans_tool_cm = std::numeric_limits<double>::quiet_NaN();
  double mean_rot_tool_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_e_agg = std::numeric_limits<double>::quiet_NaN();
};

struct ScopeResult {
  std::vector<PosePairParticle> pairs;  // final surviving pose pairs
  std::vector<ScopeIterationRecord> history;

  PlanarGraspPose mean_poker_pose() const { return mean_pose(true); }
  PlanarGraspPose mean_tool_pose() const { return mean_pose(false); }

 private:
  PlanarGraspPose mean_pose(bool poker) const {
    PlanarGraspPose m;
    if (pairs.empty()) return m;
    for (const auto& pr : pairs) {
      const PlanarGraspPose& p = poker ? pr.poker : pr.tool;
      m.x += p.x;
      m.z += p.z;
      m.theta += p.theta;
    }
    const double n = static_cast<double>(pairs.size());
    m.x /= n;
    m.z /= n;
    m.theta /= n;
    return m;
  }
};

// Gaussian perturbation of each pose in its grasp plane; a perturbation
// that breaks grasp validity is redrawn a bounded number of times, after
// which the pose is kept unperturbed. Contact sets ride along untouched.
inline void pose_noise_model(std::vector<PosePairParticle>& pairs,
                             const SurfaceModel& surface_poker,
                             const GripperSpec& gripper_poker,
                             const SurfaceModel& surface_tool,
                             const GripperSpec& gripper_tool,
                             const Vec3& sigma, int redraws, Rng& rng) {
  auto perturb = [&](PlanarGraspPose& pose, const SurfaceModel& surface,
                     const GripperSpec& gripper) {
    for (int attempt = 0; attempt < redraws; ++attempt) {
      PlanarGraspPose candidate = pose;
      candidate.x += rng.normal(0.0, sigma.x());
      candidate.z += rng.normal(0.0, sigma.y());
      candidate.theta += rng.normal(0.0, sigma.z());
      if (grasp_validity(candidate, surface, gripper)) {
        pose = candidate;
        return;
      }
    }
  };
  for (PosePairParticle& pair : pairs) {
    perturb(pair.poker, surface_poker, gripper_poker);
    perturb(pair.tool, surface_tool, gripper_tool);
  }
}

// Truncate to the best n_keep by ascending score, then systematic-resample
// n_keep survivors with weights exp(-lambda * (S - S_min)). Returns the
// selected pairs; survivor indices (into `scored`) come back through
// `survivors_out`.
inline std::vector<PosePairParticle> pair_and_select(
    const std::vector<PosePairParticle>& scored, int n_keep, double lambda,
    Rng& rng, std::vector<std::size_t>* survivors_out = nullptr) {
  if (scored.empty()) throw InputError("pair_and_select: no scored pairs");
  if (n_keep < 1) throw InputError("pair_and_select: n_keep must be >= 1");

  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].score != scored[b].score)
      return scored[a].score < scored[b].score;
    return a < b;  // deterministic ties
  });
  const std::size_t kept =
      std::min(static_cast<std::size_t>(n_keep), order.size());
  order.resize(kept);

  const double s_min = scored[order.front()].score;
  std::vector<double> w(kept);
  for (std::size_t k = 0; k < kept; ++k)
    w[k] = std::exp(-lambda * (scored[order[k]].score - s_min));

  const auto picks =
      systematic_resample(w, static_cast<std::size_t>(n_keep), rng);
  std::vector<PosePairParticle> selected;
  selected.reserve(picks.size());
  if (survivors_out) survivors_out->clear();
  for (std::size_t pick : picks) {
    selected.push_back(scored[order[pick]]);
    if (survivors_out) survivors_out->push_back(order[pick]);
  }
  return selected;
}

inline ScopeResult run_scope(const ScopeArmInput& poker,
                             const ScopeArmInput& tool,
                             const ScopeParams& params, Rng& rng,
                             const std::optional<GroundTruthPoses>& truth =
                                 std::nullopt) {
  params.check();
  poker.check("run_scope(poker)");
  tool.check("run_scope(tool)");

  const SurfaceModel& surf_p = poker.model->surface;
  const SurfaceModel& surf_t = tool.model->surface;

  ScopeResult result;

  {
    const auto poses_p =
        sample_grasp_poses(surf_p, poker.gripper, params.n_opp, params.caps,
                           rng, params.init_center_poker);
    const auto poses_t =
        sample_grasp_poses(surf_t, tool.gripper, params.n_opp, params.caps,
                           rng, params.init_center_tool);
    result.pairs.resize(static_cast<std::size_t>(params.n_opp));
    for (int k = 0; k < params.n_opp; ++k) {
      result.pairs[static_cast<std::size_t>(k)].poker = poses_p[static_cast<std::size_t>(k)];
      result.pairs[static_cast<std::size_t>(k)].tool = poses_t[static_cast<std::size_t>(k)];
    }
  }

  for (int iter = 0; iter < params.n_os; ++iter) {
    pose_noise_model(result.pairs, surf_p, poker.gripper, surf_t,
                     tool.gripper, params.pose_sigma, params.noise_redraws,
                     rng);

    // one contact filter run per pose per arm, reused across pairings
    const std::size_t n = result.pairs.size();
    std::vector<ContactParticleSet> sets_p(n), sets_t(n);
    for (std::size_t k = 0; k < n; ++k) {
      sets_p[k] = cpfgrasp(poker.wrench, result.pairs[k].poker.transform(),
                           surf_p, poker.model->sdf, poker.noise, params.cpf,
                           rng);
      sets_t[k] = cpfgrasp(tool.wrench, result.pairs[k].tool.transform(),
                           surf_t, tool.model->sdf, tool.noise, params.cpf,
                           rng);
    }

    std::vector<PosePairParticle> scored;
    scored.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const RigidTransform poker_world =
          poker.ee_in_world * result.pairs[i].poker.transform();
      for (std::size_t j = 0; j < n; ++j) {
        const RigidTransform tool_world =
            tool.ee_in_world * result.pairs[j].tool.transform();
        PosePairParticle pair;
        pair.poker = result.pairs[i].poker;
        pair.tool = result.pairs[j].tool;
        pair.poker_contacts = sets_p[i];
        pair.tool_contacts = sets_t[j];
        pair.losses.penetration = std::numeric_limits<double>::quiet_NaN();
        pair.losses.contact = std::numeric_limits<double>::quiet_NaN();
        pair.losses.force = std::numeric_limits<double>::quiet_NaN();
        if (params.mask.penetration)
          pair.losses.penetration =
              penetration_loss(tool.model->sdf, tool_world, surf_p,
                               poker_world, params.weights.eps_pp);
        if (params.mask.contact)
          pair.losses.contact = contact_consistency_loss(
              pair.poker_contacts, pair.tool_contacts, poker_world,
              tool_world);
        if (params.mask.force)
          pair.losses.force = force_alignment_loss(
              pair.poker_contacts, pair.tool_contacts, poker_world,
              tool_world);
        pair.score = score_opp(pair.losses, params.weights, params.mask);
        scored.push_back(std::move(pair));
      }
    }

    ScopeIterationRecord rec;
    rec.iteration = iter;
    rec.scored_pairs = static_cast<int>(scored.size());
    {
      double sp = 0.0, sc = 0.0, sf = 0.0, ss = 0.0;
      for (const auto& pr : scored) {
        sp += pr.losses.penetration;
        sc += pr.losses.contact;
        sf += pr.losses.force;
        ss += pr.score;
      }
      const double m = static_cast<double>(scored.size());
      rec.mean_losses.penetration = sp / m;
      rec.mean_losses.contact = sc / m;
      rec.mean_losses.force = sf / m;
      rec.mean_score = ss / m;
    }

    result.pairs = pair_and_select(scored, params.n_opp,
                                   params.weights.lambda, rng, &rec.survivors);

    for (const auto& pr : result.pairs) {
      rec.poker_poses.push_back(pr.poker);
      rec.tool_poses.push_back(pr.tool);
    }
    if (truth) {
      double tp = 0.0, rp = 0.0, tt = 0.0, rt = 0.0, ea = 0.0;
      for (const auto& pr : result.pairs) {
        const PoseErrors ep = pose_errors(pr.poker, truth->poker);
        const PoseErrors et = pose_errors(pr.tool, truth->tool);
        tp += ep.translation_cm;
        rp += ep.rotation_deg;
        tt += et.translation_cm;
        rt += et.rotation_deg;
        ea += aggregate_error(ep, et, poker.model->radius_of_gyration_cm,
                              tool.model->radius_of_gyration_cm);
      }
      const double m = static_cast<double>(result.pairs.size());
      rec.mean_trans_poker_cm = tp / m;
      rec.mean_rot_poker_deg = rp / m;
      rec.mean_trans_tool_cm = tt / m;
      rec.mean_rot_tool_deg = rt / m;
      rec.mean_e_agg = ea / m;
    }
    result.history.push_back(std::move(rec));
  }

  return result;
}

}  // namespace scope
