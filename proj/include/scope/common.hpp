#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scope {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using Index3 = Eigen::Vector3i;

// Base for everything this library throws. Subclasses exist where callers
// (or tests) need to tell failure modes apart.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidMeshError : public Error {
 public:
  using Error::Error;
};

// Voxel dims would exceed the configured per-axis cap.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Grid is all-occupied or all-empty, SDF undefined.
class DegenerateGridError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

// Surface extraction threshold yielded no points.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

// Wrench / adjoint frame mismatch.
class FrameError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise invalid numeric input.
class InputError : public Error {
 public:
  using Error::Error;
};

// No valid grasp pose found within the retry budget.
class InfeasibleGraspError : public Error {
 public:
  using Error::Error;
};

// Scenario generation could not produce a contact within its budgets.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// Text input (mesh file, CSV, config) failed to parse; carries a line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace scope
