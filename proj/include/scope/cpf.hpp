#pragma once

// Contact particle filter over surface points of a grasped object. Each
// particle hypothesises where the external contact is; the contact QP turns
// the hypothesis into a measurement likelihood, and systematic resampling
// with annealed surface-constrained motion concentrates the belief.

#include <algorithm>
#include <cmath>
#include <vector>

#include "scope/common.hpp"
#include "scope/contact_qp.hpp"
#include "scope/friction_cone.hpp"
#include "scope/resample.hpp"
#include "scope/rng.hpp"
#include "scope/sdf.hpp"
#include "scope/surface.hpp"
#include "scope/transform.hpp"

namespace scope {

struct ContactParticle {
  Vec3 location = Vec3::Zero();  // object frame
  Vec3 normal = Vec3::Zero();    // unit outward, object frame
  double likelihood = 0.0;       // normalised over the set
  ContactQpResult qp;
};

struct ContactParticleSet {
  std::vector<ContactParticle> particles;

  std::size_t size() const { return particles.size(); }

  std::vector<double> likelihoods() const {
    std::vector<double> w;
    w.reserve(particles.size());
    for (const auto& p : particles) w.push_back(p.likelihood);
    return w;
  }

  Vec3 weighted_mean_location() const {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : particles) mean += p.likelihood * p.location;
    return mean;
  }

  double min_residual() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& p : particles) r = std::min(r, p.qp.residual);
    return r;
  }
};

struct CpfParams {
  int n_clp = 40;           // particles
  int n_cs = 10;            // filter iterations
  int n_f = 8;              // friction cone edges
  double mu = 0.5;
  double motion_sigma = 0.005;      // metres, per-axis Gaussian
  double motion_anneal = 0.8;       // sigma multiplier per iteration
  double resample_threshold = 1.0;  // resample when ESS <= threshold * n

  void check() const {
    if (n_clp < 1) throw InputError("CpfParams: n_clp must be >= 1");
    if (n_cs < 0) throw InputError("CpfParams: n_cs must be >= 0");
    if (n_f < 3) throw InputError("CpfParams: n_f must be >= 3");
    if (!(mu > 0.0)) throw InputError("CpfParams: mu must be positive");
    if (!(motion_sigma >= 0.0))
      throw InputError("CpfParams: motion_sigma must be >= 0");
    if (!(motion_anneal > 0.0 && motion_anneal <= 1.0))
      throw InputError("CpfParams: motion_anneal must be in (0, 1]");
    if (!(resample_threshold >= 0.0 && resample_threshold <= 1.0))
      throw InputError("CpfParams: resample_threshold must be in [0, 1]");
  }
};

// Uniform draw from the surface model: without replacement when it has at
// least n_clp points (partial Fisher-Yates), with replacement otherwise.
inline ContactParticleSet init_contact_particles(const SurfaceModel& surface,
                                                 int n_clp, Rng& rng) {
  if (surface.points.empty())
    throw InputError("init_contact_particles: empty surface");
  if (n_clp < 1) throw InputError("init_contact_particles: n_clp must be >= 1");

  ContactParticleSet set;
  set.particles.reserve(static_cast<std::size_t>(n_clp));
  const std::size_t n_pts = surface.points.size();

  auto push = [&](std::size_t idx) {
    ContactParticle p;
    p.location = surface.points[idx].position;
    p.normal = surface.points[idx].normal;
    p.likelihood = 1.0 / static_cast<double>(n_clp);
    set.particles.push_back(p);
  };

  if (n_pts >= static_cast<std::size_t>(n_clp)) {
    std::vector<std::size_t> pool(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) pool[i] = i;
    for (int k = 0; k < n_clp; ++k) {
      const std::size_t j =
          static_cast<std::size_t>(k) +
          static_cast<std::size_t>(rng.uniform_int(n_pts - static_cast<std::size_t>(k)));
      std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
      push(pool[static_cast<std::size_t>(k)]);
    }
  } else {
    for (int k = 0; k < n_clp; ++k)
      push(static_cast<std::size_t>(rng.uniform_int(n_pts)));
  }
  return set;
}

// Gaussian perturbation projected back onto the surface (nearest surface
// point, which also refreshes the normal). Particle count is preserved.
inline void motion_model(ContactParticleSet& set, const SurfaceIndex& index,
                         double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InputError("motion_model: sigma must be finite and >= 0");
  for (ContactParticle& p : set.particles) {
    const Vec3 proposal = p.location + rng.normal3(sigma);
    const SurfacePoint& snapped = index.nearest_point(proposal);
    p.location = snapped.position;
    p.normal = snapped.normal;
  }
}

// QP-scores every particle against the measured wrench and normalises
// likelihoods over the set. Exponentials are shifted by the best residual,
// which changes nothing after normalisation but keeps hopeless sets from
// flushing to all-zero; a set that still sums to zero becomes uniform.
inline void score_contact_particles(ContactParticleSet& set,
                                    const Wrench& gamma_e,
                                    const RigidTransform& object_in_ee,
                                    const SensorNoise& noise, double mu,
                                    int n_f) {
  if (set.particles.empty())
    throw InputError("score_contact_particles: empty particle set");
  object_in_ee.check("score_contact_particles");

  for (ContactParticle& p : set.particles) {
    const FrictionCone cone_obj =
        build_friction_cone(p.location, p.normal, mu, n_f);
    const Mat3 tangent_frame = frame_from_inward_normal(cone_obj.normal);

    RigidTransform contact_in_ee;
    contact_in_ee.rotation = object_in_ee.rotation * tangent_frame;
    contact_in_ee.translation = object_in_ee.apply(p.location);

    // The adjoint block form consumes the transform that carries EE
    // coordinates into the contact frame, so the EE pose in the contact
    // frame is what maps contact wrenches to measured EE wrenches.
    const ContactAdjoint adj =
        contact_adjoint(contact_in_ee.inverse(), "contact", gamma_e.frame);

    FrictionCone cone_c;
    cone_c.apex = Vec3::Zero();
    cone_c.normal = tangent_frame.transpose() * cone_obj.normal;
    cone_c.mu = cone_obj.mu;
    cone_c.edges = cone_edges_in_frame(cone_obj, tangent_frame);

    p.qp = solve_contact_qp(gamma_e, adj, cone_c, noise);
  }

  const double r_min = set.min_residual();
  double total = 0.0;
  for (ContactParticle& p : set.particles) {
    p.likelihood = std::exp(-0.5 * (p.qp.residual - r_min));
    total += p.likelihood;
  }
  if (total > 0.0 && std::isfinite(total)) {
    for (ContactParticle& p : set.particles) p.likelihood /= total;
  } else {
    const double u = 1.0 / static_cast<double>(set.particles.size());
    for (ContactParticle& p : set.particles) p.likelihood = u;
  }
}

// Systematic resampling by likelihood; the returned set has uniform
// weights. All-zero weights degrade to a uniform draw rather than failing.
inline void low_variance_resample(ContactParticleSet& set, Rng& rng) {
  if (set.particles.empty())
    throw InputError("low_variance_resample: empty particle set");
  std::vector<double> w = set.likelihoods();
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0) || !std::isfinite(total))
    std::fill(w.begin(), w.end(), 1.0);

  const auto picks = systematic_resample(w, set.particles.size(), rng);
  std::vector<ContactParticle> next;
  next.reserve(picks.size());
  const double u = 1.0 / static_cast<double>(set.particles.size());
  for (std::size_t idx : picks) {
    next.push_back(set.particles[idx]);
    next.back().likelihood = u;
  }
  set.particles = std::move(next);
}

// Full filter pass: init, then per iteration annealed motion, scoring and
// (ESS-gated, default always) resampling; a final scoring pass leaves the
// returned set with fresh likelihoods. n_cs = 0 returns the scored initial
// set.
inline ContactParticleSet cpfgrasp(const Wrench& gamma_e,
                                   const RigidTransform& object_in_ee,
                                   const SurfaceModel& surface,
                                   const SignedDistanceField& sdf,
                                   const SensorNoise& noise,
                                   const CpfParams& params, Rng& rng) {
  params.check();
  if (surface.voxel_size > 0.0 && sdf.voxel_size > 0.0 &&
      surface.voxel_size != sdf.voxel_size)
    throw InputError("cpfgrasp: surface and SDF resolutions disagree");

  ContactParticleSet set = init_contact_particles(surface, params.n_clp, rng);
  const SurfaceIndex index(surface);

  double sigma = params.motion_sigma;
  for (int i = 0; i < params.n_cs; ++i) {
    motion_model(set, index, sigma, rng);
    score_contact_particles(set, gamma_e, object_in_ee, noise, params.mu,
                            params.n_f);
    const double ess = effective_sample_size(set.likelihoods());
    if (ess <= params.resample_threshold * static_cast<double>(set.size()))
      low_variance_resample(set, rng);
    sigma *= params.motion_anneal;
  }
  score_contact_particles(set, gamma_e, object_in_ee, noise, params.mu,
                          params.n_f);
  return set;
}

}  // namespace scope
