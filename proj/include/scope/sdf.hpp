#pragma once

// Signed distance field on the voxel grid. Values are +/- the exact
// Euclidean distance from each voxel center to the nearest boundary voxel
// center (an occupied voxel with an empty 6-neighbour or on the grid edge),
// negative where occupied. Computed with the Felzenszwalb lower-envelope
// squared-distance transform, one pass per axis, which is exact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "scope/common.hpp"
#include "scope/voxelize.hpp"

namespace scope {

struct SignedDistanceField {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  Index3 dims = Index3::Zero();
  std::vector<double> values;           // x-fastest, metres
  std::vector<std::uint8_t> occupancy;  // copy of the source grid

  std::size_t linear(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(iy) +
                static_cast<std::size_t>(dims.y()) *
                    static_cast<std::size_t>(iz));
  }

  double value_at(int ix, int iy, int iz) const {
    return values[linear(ix, iy, iz)];
  }

  bool occupied(int ix, int iy, int iz) const {
    return occupancy[linear(ix, iy, iz)] != 0;
  }

  Vec3 center(int ix, int iy, int iz) const {
    return origin + voxel_size * Vec3(ix + 0.5, iy + 0.5, iz + 0.5);
  }

  // Domain where trilinear interpolation is defined: the hull of voxel
  // centers.
  bool in_sample_domain(const Vec3& p) const {
    for (int a = 0; a < 3; ++a) {
      const double lo = origin[a] + 0.5 * voxel_size;
      const double hi = origin[a] + (dims[a] - 0.5) * voxel_size;
      if (!(p[a] >= lo && p[a] <= hi)) return false;
    }
    return true;
  }

  std::optional<double> try_sample(const Vec3& p) const {
    if (!p.allFinite() || !in_sample_domain(p)) return std::nullopt;
    double t[3];
    int i0[3];
    for (int a = 0; a < 3; ++a) {
      const double x = (p[a] - origin[a]) / voxel_size - 0.5;
      int i = static_cast<int>(std::floor(x));
      i = std::clamp(i, 0, dims[a] - 2);
      i0[a] = i;
      t[a] = std::clamp(x - i, 0.0, 1.0);
    }
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const double w = (dx ? t[0] : 1.0 - t[0]) *
                           (dy ? t[1] : 1.0 - t[1]) *
                           (dz ? t[2] : 1.0 - t[2]);
          acc += w * value_at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
        }
    return acc;
  }

  double sample(const Vec3& p) const {
    const auto v = try_sample(p);
    if (!v) throw OutOfBoundsError("sdf_sample: point outside grid bounds");
    return *v;
  }

  // Central differences of the trilinear field. Default step voxel_size/4;
  // requires a one-voxel interior margin.
  Vec3 gradient(const Vec3& p, double step = 0.0) const {
    if (step <= 0.0) step = 0.25 * voxel_size;
    for (int a = 0; a < 3; ++a) {
      const double lo = origin[a] + voxel_size;
      const double hi = origin[a] + (dims[a] - 1) * voxel_size;
      if (!(p[a] >= lo && p[a] <= hi))
        throw OutOfBoundsError(
            "sdf_gradient: point must be interior with one-voxel margin");
    }
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
      Vec3 hi = p, lo = p;
      hi[a] += step;
      lo[a] -= step;
      g[a] = (sample(hi) - sample(lo)) / (2.0 * step);
    }
    return g;
  }
};

namespace detail {

// 1D squared Euclidean distance transform (lower envelope of parabolas).
// Heights of +inf are legal: an infinite parabola never joins the envelope
// (a finite one replaces it outright), so all-empty scanlines pass through
// unchanged.
inline void edt_1d(const double* f, double* d, int n, int* v, double* z) {
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == inf) continue;
    double s;
    for (;;) {
      if (f[v[k]] == inf) {
        s = -inf;  // finite parabola lies below an infinite one everywhere
      } else {
        s = ((f[q] + q * static_cast<double>(q)) -
             (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
            (2.0 * q - 2.0 * v[k]);
      }
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates the whole line
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

inline SignedDistanceField compute_sdf(const VoxelGrid& grid) {
  grid.check_consistent();

  const std::size_t total = grid.occupancy.size();
  const std::size_t occ = grid.occupied_count();
  if (occ == 0 || occ == total)
    throw DegenerateGridError(
        "compute_sdf: grid must contain both occupied and empty voxels");

  SignedDistanceField sdf;
  sdf.origin = grid.origin;
  sdf.voxel_size = grid.voxel_size;
  sdf.dims = grid.dims;
  sdf.occupancy = grid.occupancy;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(total, inf);

  // seed: boundary voxels (occupied with an empty 6-neighbour or touching
  // the grid edge) at squared distance 0
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        if (!grid.occupied(ix, iy, iz)) continue;
        bool boundary = false;
        static const int off[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
        for (const auto& o : off) {
          const int jx = ix + o[0], jy = iy + o[1], jz = iz + o[2];
          if (!grid.in_grid(jx, jy, jz) || !grid.occupied(jx, jy, jz)) {
            boundary = true;
            break;
          }
        }
        if (boundary) dist[grid.linear(ix, iy, iz)] = 0.0;
      }

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(static_cast<std::size_t>(nmax)),
      d(static_cast<std::size_t>(nmax)), z(static_cast<std::size_t>(nmax) + 1);
  std::vector<int> v(static_cast<std::size_t>(nmax));

  // pass along x
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) f[static_cast<std::size_t>(ix)] = dist[grid.linear(ix, iy, iz)];
      detail::edt_1d(f.data(), d.data(), nx, v.data(), z.data());
      for (int ix = 0; ix < nx; ++ix) dist[grid.linear(ix, iy, iz)] = d[static_cast<std::size_t>(ix)];
    }
  // pass along y
  for (int iz = 0; iz < nz; ++iz)
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) f[static_cast<std::size_t>(iy)] = dist[grid.linear(ix, iy, iz)];
      detail::edt_1d(f.data(), d.data(), ny, v.data(), z.data());
      for (int iy = 0; iy < ny; ++iy) dist[grid.linear(ix, iy, iz)] = d[static_cast<std::size_t>(iy)];
    }
  // pass along z
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      for (int iz = 0; iz < nz; ++iz) f[static_cast<std::size_t>(iz)] = dist[grid.linear(ix, iy, iz)];
      detail::edt_1d(f.data(), d.data(), nz, v.data(), z.data());
      for (int iz = 0; iz < nz; ++iz) dist[grid.linear(ix, iy, iz)] = d[static_cast<std::size_t>(iz)];
    }

  sdf.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double metres = std::sqrt(dist[i]) * grid.voxel_size;
    sdf.values[i] = grid.occupancy[i] ? -metres : metres;
  }
  return sdf;
}

}  // namespace scope
