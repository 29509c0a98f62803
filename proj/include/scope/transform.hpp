#pragma once

#include <cmath>

#include "scope/common.hpp"

namespace scope {

// Skew-symmetric cross-product matrix: hat(p) * v == p x v.
inline Mat3 hat(const Vec3& p) {
  Mat3 m;
  m << 0.0, -p.z(), p.y(),
       p.z(), 0.0, -p.x(),
      -p.y(), p.x(), 0.0;
  return m;
}

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    RigidTransform t;
    t.rotation = rotation.transpose();
    t.translation = -(t.rotation * translation);
    return t;
  }

  RigidTransform operator*(const RigidTransform& rhs) const {
    RigidTransform t;
    t.rotation = rotation * rhs.rotation;
    t.translation = rotation * rhs.translation + translation;
    return t;
  }

  bool orthonormal(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol && rotation.determinant() > 0.0;
  }

  void check(const char* who = "RigidTransform") const {
    if (!orthonormal())
      throw InputError(std::string(who) + ": rotation not orthonormal");
  }

  static RigidTransform identity() { return {}; }
};

inline Mat3 rotation_about_axis(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const Mat3 k = hat(a);
  return Mat3::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

inline Mat3 rotation_y(double angle) {
  return rotation_about_axis(Vec3::UnitY(), angle);
}

inline Mat3 rotation_x(double angle) {
  return rotation_about_axis(Vec3::UnitX(), angle);
}

// Geodesic distance on SO(3), radians in [0, pi].
inline double rotation_geodesic(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) * 0.5;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline double deg(double rad) { return rad * 180.0 / M_PI; }
inline double rad(double degrees) { return degrees * M_PI / 180.0; }

}  // namespace scope
