#pragma once

// Shared generators for randomized tests: rotations, unit vectors, and
// fully assembled contact-QP instances (adjoint, cone in the contact frame,
// sensor noise, measured wrench).

#include <cmath>
#include <string>

#include "scope/adjoint.hpp"
#include "scope/friction_cone.hpp"
#include "scope/rng.hpp"
#include "scope/sensor_noise.hpp"
#include "scope/transform.hpp"
#include "scope/wrench.hpp"

namespace scope::testkit {

inline Vec3 random_unit(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Mat3 random_rotation(Rng& rng) {
  return rotation_about_axis(random_unit(rng), rng.uniform(0.0, 2.0 * M_PI));
}

inline RigidTransform random_transform(Rng& rng, double scale = 0.2) {
  RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = scale * Vec3(rng.normal(), rng.normal(), rng.normal());
  return t;
}

struct QpInstance {
  ContactAdjoint adj;
  FrictionCone cone_contact;  // edges in the contact frame
  SensorNoise noise;
  Wrench gamma_e;             // measured wrench, EE frame
};

// Random contact geometry; when force_in_cone is set the wrench is the
// image of a nonnegative edge combination plus small noise, otherwise it is
// drawn free of the cone entirely.
inline QpInstance random_qp_instance(Rng& rng, int n_f, bool force_in_cone) {
  QpInstance inst;

  const Vec3 outward = random_unit(rng);
  const Vec3 point = 0.1 * Vec3(rng.normal(), rng.normal(), rng.normal());
  const double mu = rng.uniform(0.2, 1.0);
  const FrictionCone cone_obj = build_friction_cone(point, outward, mu, n_f);
  const Mat3 frame = frame_from_inward_normal(cone_obj.normal);

  RigidTransform object_in_ee = random_transform(rng);
  RigidTransform contact_in_ee;
  contact_in_ee.rotation = object_in_ee.rotation * frame;
  contact_in_ee.translation = object_in_ee.apply(point);
  inst.adj = contact_adjoint(contact_in_ee.inverse(), "contact", "ee");

  inst.cone_contact.apex = Vec3::Zero();
  inst.cone_contact.normal = frame.transpose() * cone_obj.normal;
  inst.cone_contact.mu = mu;
  inst.cone_contact.edges = cone_edges_in_frame(cone_obj, frame);

  inst.noise = SensorNoise::from_sigmas(rng.uniform(0.05, 0.5),
                                        rng.uniform(5e-4, 5e-3));

  if (force_in_cone) {
    Vec3 force_c = Vec3::Zero();
    for (const Vec3& e : inst.cone_contact.edges)
      force_c += rng.uniform(0.0, 4.0) * e;
    const Vec6 gamma =
        inst.adj.matrix * Wrench(force_c, Vec3::Zero(), "contact").stacked();
    Vec6 noisy = gamma;
    for (int i = 0; i < 6; ++i)
      noisy[i] += rng.normal(0.0, std::sqrt(inst.noise.variance[i]));
    inst.gamma_e = Wrench::from_stacked(noisy, "ee");
  } else {
    Vec6 gamma;
    for (int i = 0; i < 3; ++i) gamma[i] = rng.normal(0.0, 5.0);
    for (int i = 3; i < 6; ++i) gamma[i] = rng.normal(0.0, 0.5);
    inst.gamma_e = Wrench::from_stacked(gamma, "ee");
  }
  return inst;
}

}  // namespace scope::testkit
