#pragma once

// Whitened contact QP: how well can a nonnegative combination of friction
// cone edges at a hypothesised contact, pushed through the contact adjoint,
// explain the measured end-effector wrench?
//
//   residual = min_{alpha >= 0} (Gamma_E - A B alpha)^T Sigma^-1 (Gamma_E - A B alpha)
//
// with B stacking the cone edges over zero moment rows (point contact
// transmits no torque in its own frame). Whitening by Sigma^-1/2 turns this
// into plain NNLS.

#include <cmath>
#include <vector>

#include "scope/adjoint.hpp"
#include "scope/common.hpp"
#include "scope/friction_cone.hpp"
#include "scope/nnls.hpp"
#include "scope/sensor_noise.hpp"
#include "scope/wrench.hpp"

namespace scope {

struct ContactQpResult {
  VecX alpha;           // cone edge activations, all >= 0
  Wrench gamma_c;       // contact-frame wrench (sum alpha_i f_i, zero moment)
  Wrench predicted_ee;  // adjoint-mapped gamma_c in the EE frame
  double residual = 0.0;
  double kkt_gap = 0.0;
};

// cone.edges must be expressed in the adjoint's source (contact) frame;
// use cone_edges_in_frame() when the cone was built in object coordinates.
inline ContactQpResult solve_contact_qp(const Wrench& gamma_e,
                                        const ContactAdjoint& adj,
                                        const FrictionCone& cone,
                                        const SensorNoise& noise) {
  if (gamma_e.frame != adj.target)
    throw FrameError("solve_contact_qp: wrench frame '" + gamma_e.frame +
                     "' does not match adjoint target '" + adj.target + "'");
  const int n_f = static_cast<int>(cone.edges.size());
  if (n_f < 3) throw InputError("solve_contact_qp: cone needs >= 3 edges");
  for (const Vec3& e : cone.edges)
    if (!e.allFinite())
      throw InputError("solve_contact_qp: non-finite cone edge");

  Eigen::Matrix<double, 6, Eigen::Dynamic> B(6, n_f);
  for (int j = 0; j < n_f; ++j) {
    B.col(j).head<3>() = cone.edges[static_cast<std::size_t>(j)];
    B.col(j).tail<3>().setZero();
  }

  const Vec6 w = noise.whitener();
  const MatX M = w.asDiagonal() * (adj.matrix * B);
  const VecX y = w.asDiagonal() * gamma_e.stacked();

  const NnlsResult sol = nnls(M, y);

  ContactQpResult out;
  out.alpha = sol.x;
  Vec3 force = Vec3::Zero();
  for (int j = 0; j < n_f; ++j) force += sol.x[j] * cone.edges[static_cast<std::size_t>(j)];
  out.gamma_c = Wrench(force, Vec3::Zero(), adj.source);
  out.predicted_ee =
      Wrench::from_stacked(adj.matrix * out.gamma_c.stacked(), adj.target);
  out.residual = sol.objective;
  out.kkt_gap = sol.kkt_gap;
  return out;
}

// Unnormalised measurement likelihood; particle sets normalise over
// themselves.
inline double contact_likelihood(const ContactQpResult& result) {
  return std::exp(-0.5 * result.residual);
}

}  // namespace scope
