#pragma once

// Surface point model extracted from the SDF, plus the two queries the
// filters lean on: nearest surface point (bucket-grid accelerated, exact)
// and penetration counting of one surface against another object's SDF.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "scope/common.hpp"
#include "scope/sdf.hpp"
#include "scope/transform.hpp"

namespace scope {

struct SurfacePoint {
  Vec3 position = Vec3::Zero();  // object frame, metres
  Vec3 normal = Vec3::Zero();    // unit, outward
  Index3 voxel = Index3::Zero(); // source voxel
};

struct SurfaceModel {
  std::vector<SurfacePoint> points;
  double voxel_size = 0.0;

  std::size_t size() const { return points.size(); }
};

// |value| <= eps (default 0.75 * voxel_size) and occupied. Normals are
// normalized SDF gradients; a boundary voxel with a vanishing gradient
// (symmetric thin features) falls back to the mean direction of its empty
// 6-neighbours. Scan order is x-fastest, so output order is deterministic.
inline SurfaceModel extract_surface(const SignedDistanceField& sdf,
                                    double eps = -1.0) {
  if (eps < 0.0) eps = 0.75 * sdf.voxel_size;

  SurfaceModel surface;
  surface.voxel_size = sdf.voxel_size;

  static const int off[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};

  const int nx = sdf.dims.x(), ny = sdf.dims.y(), nz = sdf.dims.z();
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        if (!sdf.occupied(ix, iy, iz)) continue;
        if (std::abs(sdf.value_at(ix, iy, iz)) > eps) continue;

        SurfacePoint pt;
        pt.position = sdf.center(ix, iy, iz);
        pt.voxel = Index3(ix, iy, iz);

        Vec3 g = Vec3::Zero();
        bool have_gradient = true;
        try {
          g = sdf.gradient(pt.position);
        } catch (const OutOfBoundsError&) {
          have_gradient = false;
        }
        if (!have_gradient || g.norm() < 1e-12) {
          Vec3 dir = Vec3::Zero();
          for (const auto& o : off) {
            const int jx = ix + o[0], jy = iy + o[1], jz = iz + o[2];
            const bool empty = !(jx >= 0 && jy >= 0 && jz >= 0 &&
                                 jx < nx && jy < ny && jz < nz) ||
                               !sdf.occupied(jx, jy, jz);
            if (empty) dir += Vec3(o[0], o[1], o[2]);
          }
          if (dir.norm() < 1e-12) continue;  // interior-like, skip
          g = dir;
        }
        pt.normal = g.normalized();
        surface.points.push_back(pt);
      }

  if (surface.points.empty())
    throw ThresholdError("extract_surface: no surface points at eps=" +
                         std::to_string(eps));
  return surface;
}

// Counts surface points of b (posed by pose_b) that fall strictly inside
// a's solid (sdf_a, posed by pose_a). Points outside a's grid are free.
inline int count_penetrating(const SignedDistanceField& sdf_a,
                             const RigidTransform& pose_a,
                             const SurfaceModel& surface_b,
                             const RigidTransform& pose_b) {
  const RigidTransform rel = pose_a.inverse() * pose_b;
  int count = 0;
  for (const SurfacePoint& pt : surface_b.points) {
    const auto v = sdf_a.try_sample(rel.apply(pt.position));
    if (v && *v < 0.0) ++count;
  }
  return count;
}

// Uniform bucket grid over a surface model for exact nearest-point queries.
// Buckets are voxel-sized; the search expands ring by ring until the best
// distance found is provably final.
class SurfaceIndex {
 public:
  explicit SurfaceIndex(const SurfaceModel& surface)
      : surface_(&surface), cell_(surface.voxel_size) {
    if (surface.points.empty())
      throw InputError("SurfaceIndex: empty surface");
    if (cell_ <= 0.0) cell_ = 1e-3;
    lo_ = hi_ = surface.points.front().position;
    for (const auto& pt : surface.points) {
      lo_ = lo_.cwiseMin(pt.position);
      hi_ = hi_.cwiseMax(pt.position);
    }
    for (int a = 0; a < 3; ++a)
      dims_[a] = static_cast<int>((hi_[a] - lo_[a]) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z());
    for (std::size_t i = 0; i < surface.points.size(); ++i)
      buckets_[bucket_of(surface.points[i].position)].push_back(static_cast<int>(i));
  }

  // Index of the surface point nearest to p; ties break to the lowest index.
  int nearest(const Vec3& p) const {
    Index3 c;
    for (int a = 0; a < 3; ++a) {
      const int i = static_cast<int>(std::floor((p[a] - lo_[a]) / cell_));
      c[a] = std::clamp(i, 0, dims_[a] - 1);
    }
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    const int rmax = std::max({dims_.x(), dims_.y(), dims_.z()});
    for (int r = 0; r <= rmax; ++r) {
      // once a hit exists, one extra ring guarantees exactness (bucket
      // boundaries are not centered on p)
      if (best >= 0 && std::sqrt(best_d2) < (r - 1) * cell_) break;
      bool any_cell = false;
      for (int dz = -r; dz <= r; ++dz)
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r)
              continue;  // ring shell only
            const int ix = c.x() + dx, iy = c.y() + dy, iz = c.z() + dz;
            if (ix < 0 || iy < 0 || iz < 0 || ix >= dims_.x() ||
                iy >= dims_.y() || iz >= dims_.z())
              continue;
            any_cell = true;
            for (int idx : buckets_[linear(ix, iy, iz)]) {
              const double d2 =
                  (surface_->points[static_cast<std::size_t>(idx)].position - p).squaredNorm();
              if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                best_d2 = d2;
                best = idx;
              }
            }
          }
      if (!any_cell && best >= 0) break;
    }
    return best;
  }

  const SurfacePoint& nearest_point(const Vec3& p) const {
    return surface_->points[static_cast<std::size_t>(nearest(p))];
  }

 private:
  std::size_t bucket_of(const Vec3& p) const {
    Index3 c;
    for (int a = 0; a < 3; ++a) {
      const int i = static_cast<int>(std::floor((p[a] - lo_[a]) / cell_));
      c[a] = std::clamp(i, 0, dims_[a] - 1);
    }
    return linear(c.x(), c.y(), c.z());
  }

  std::size_t linear(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(iy) +
                static_cast<std::size_t>(dims_.y()) *
                    static_cast<std::size_t>(iz));
  }

  const SurfaceModel* surface_;
  double cell_;
  Vec3 lo_ = Vec3::Zero(), hi_ = Vec3::Zero();
  Index3 dims_ = Index3::Ones();
  std::vector<std::vector<int>> buckets_;
};

}  // namespace scope
