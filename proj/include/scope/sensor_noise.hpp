#pragma once

#include <cmath>

#include "scope/common.hpp"

namespace scope {

// Diagonal wrench measurement covariance. Variances are floored so the
// whitener stays finite even for synthetic noiseless data.
struct SensorNoise {
  static constexpr double kForceVarFloor = 1e-8;    // N^2
  static constexpr double kMomentVarFloor = 1e-10;  // (N*m)^2

  Vec6 variance;  // Fx Fy Fz Mx My Mz

  SensorNoise() : variance(floored(Vec6::Zero())) {}

  explicit SensorNoise(const Vec6& var) : variance(floored(var)) {
    if (!var.allFinite()) throw InputError("SensorNoise: non-finite variance");
    if ((var.array() < 0.0).any())
      throw InputError("SensorNoise: negative variance");
  }

  static SensorNoise from_sigmas(double sigma_force, double sigma_moment) {
    Vec6 var;
    var << sigma_force * sigma_force, sigma_force * sigma_force,
        sigma_force * sigma_force, sigma_moment * sigma_moment,
        sigma_moment * sigma_moment, sigma_moment * sigma_moment;
    return SensorNoise(var);
  }

  // Diagonal of Sigma^(-1/2).
  Vec6 whitener() const {
    return variance.array().sqrt().inverse().matrix();
  }

  SensorNoise scaled(double c) const {
    if (!(c > 0.0)) throw InputError("SensorNoise: scale must be positive");
    return SensorNoise(Vec6(variance * c));
  }

 private:
  static Vec6 floored(Vec6 var) {
    for (int i = 0; i < 3; ++i) var[i] = std::max(var[i], kForceVarFloor);
    for (int i = 3; i < 6; ++i) var[i] = std::max(var[i], kMomentVarFloor);
    return var;
  }
};

}  // namespace scope
