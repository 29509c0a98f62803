#pragma once

// Non-negative least squares, Lawson-Hanson active-set. Solves
//   min_x ||M x - y||^2   s.t.  x >= 0
// exactly (up to linear-solve roundoff) in finitely many active-set moves.
// Rank-deficient passive sets are handled by taking the minimum-norm
// solution of the subproblem.

#include <Eigen/QR>

#include <cmath>
#include <vector>

#include "scope/common.hpp"

namespace scope {

struct NnlsResult {
  VecX x;
  double objective = 0.0;  // squared residual norm at x
  double kkt_gap = 0.0;    // worst stationarity / dual-feasibility violation
  int iterations = 0;
};

// tol is the KKT tolerance, applied relative to the gradient scale of the
// problem (max(1, ||M^T y||_inf)); for problems of order-one scale it acts
// as the absolute bound.
inline NnlsResult nnls(const MatX& M, const VecX& y, double tol = 1e-10) {
  if (M.rows() != y.size()) throw InputError("nnls: dimension mismatch");
  if (!M.allFinite() || !y.allFinite())
    throw InputError("nnls: non-finite input");

  const Eigen::Index n = M.cols();
  NnlsResult res;
  res.x = VecX::Zero(n);

  const double scale = std::max(1.0, (M.transpose() * y).cwiseAbs().maxCoeff());
  const double eps_entry = tol * scale;

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const int max_outer = static_cast<int>(3 * n) + 30;

  auto solve_passive = [&](const std::vector<bool>& in) -> VecX {
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (in[static_cast<std::size_t>(j)]) ++k;
    MatX Mp(M.rows(), k);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (in[static_cast<std::size_t>(j)]) Mp.col(col++) = M.col(j);
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(Mp);
    const VecX zp = cod.solve(y);
    VecX z = VecX::Zero(n);
    col = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (in[static_cast<std::size_t>(j)]) z[j] = zp[col++];
    return z;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    ++res.iterations;
    const VecX w = M.transpose() * (y - M * res.x);

    Eigen::Index enter = -1;
    double wmax = eps_entry;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
        wmax = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;  // dual feasible
    passive[static_cast<std::size_t>(enter)] = true;

    for (int inner = 0; inner < max_outer; ++inner) {
      const VecX z = solve_passive(passive);

      bool feasible = true;
      double t = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!passive[static_cast<std::size_t>(j)] || z[j] > 0.0) continue;
        feasible = false;
        const double denom = res.x[j] - z[j];
        if (denom > 0.0) t = std::min(t, res.x[j] / denom);
      }
      if (feasible) {
        res.x = z;
        break;
      }
      res.x += t * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] &&
            (res.x[j] <= 0.0 || (z[j] <= 0.0 && res.x[j] < 1e-14 * scale))) {
          res.x[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }

  const VecX g = M.transpose() * (y - M * res.x);
  double gap = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (res.x[j] > 0.0)
      gap = std::max(gap, std::abs(g[j]));  // stationarity on the free set
    else
      gap = std::max(gap, std::max(0.0, g[j]));  // dual feasibility
  }
  res.kkt_gap = gap;
  res.objective = (M * res.x - y).squaredNorm();
  return res;
}

}  // namespace scope
