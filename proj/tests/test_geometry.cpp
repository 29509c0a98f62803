#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "scope/mesh.hpp"
#include "scope/model.hpp"
#include "scope/models.hpp"
#include "scope/rng.hpp"
#include "scope/sdf.hpp"
#include "scope/surface.hpp"
#include "scope/voxelize.hpp"

#include "test_helpers.hpp"

using namespace scope;

namespace {

// Single shared preprocessing of each builtin so the suite stays fast.
const ObjectModel& hex_key_model() {
  static const ObjectModel m = load_builtin_model("hex_key");
  return m;
}

const ObjectModel& poker_model() {
  static const ObjectModel m = load_builtin_model("poker");
  return m;
}

// Exact distance transform oracle: nearest boundary voxel by exhaustive
// scan. Boundary voxels are occupied cells with an empty 6-neighbour or a
// grid face; matches the seeding convention of compute_sdf.
std::vector<double> brute_force_sdf(const VoxelGrid& grid) {
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  std::vector<Index3> seeds;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        if (!grid.occupied(x, y, z)) continue;
        bool boundary = false;
        const int nb[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                              {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
        for (const auto& d : nb) {
          const int ax = x + d[0], ay = y + d[1], az = z + d[2];
          if (!grid.in_grid(ax, ay, az) || !grid.occupied(ax, ay, az)) {
            boundary = true;
            break;
          }
        }
        if (boundary) seeds.push_back(Index3(x, y, z));
      }

  std::vector<double> out(grid.occupancy.size(),
                          std::numeric_limits<double>::infinity());
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (const Index3& s : seeds) {
          const double dx = x - s.x(), dy = y - s.y(), dz = z - s.z();
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        const double d = std::sqrt(best) * grid.voxel_size;
        out[grid.linear(x, y, z)] = grid.occupied(x, y, z) ? -d : d;
      }
  return out;
}

}  // namespace

TEST(Mesh, ValidateCatchesDefects) {
  TriangleMesh empty;
  EXPECT_THROW(empty.validate(), InvalidMeshError);

  TriangleMesh bad_index = make_box_mesh(Vec3::Zero(), Vec3::Ones());
  bad_index.triangles[0][1] = 99;
  EXPECT_THROW(bad_index.validate(), InvalidMeshError);

  TriangleMesh degenerate = make_box_mesh(Vec3::Zero(), Vec3::Ones());
  degenerate.triangles[0] = {0, 0, 1};
  EXPECT_THROW(degenerate.validate(), InvalidMeshError);

  TriangleMesh ok = make_box_mesh(Vec3::Zero(), Vec3::Ones());
  EXPECT_NO_THROW(ok.validate());
}

TEST(Mesh, SignedVolumeOfBuiltins) {
  EXPECT_NEAR(signed_volume(builtin_wrench_mesh()), 0.025 * 0.01 * 0.10, 1e-12);
  EXPECT_NEAR(signed_volume(builtin_poker_mesh()), 0.01 * 0.01 * 0.12, 1e-12);
  const double hex_area = 2.0 * std::sqrt(3.0) * 0.005 * 0.005;
  EXPECT_NEAR(signed_volume(builtin_hex_key_mesh()), hex_area * 0.11, 1e-12);
}

TEST(Mesh, BuiltinsValidateAndSitOnGraspPlane) {
  for (const char* name : {"hex_key", "wrench", "poker"}) {
    const TriangleMesh mesh = builtin_mesh(name);
    EXPECT_NO_THROW(mesh.validate()) << name;
    Vec3 lo, hi;
    mesh.bounds(lo, hi);
    EXPECT_NEAR(lo.y(), 0.0, 1e-15) << name;  // grasp face in y = 0
  }
  EXPECT_THROW(builtin_mesh("teapot"), InputError);
}

TEST(Voxelize, CubeHasExactInteriorCount) {
  const TriangleMesh cube = make_box_mesh(Vec3::Zero(), Vec3(0.1, 0.1, 0.1));
  const VoxelGrid grid = voxelize(cube, 0.01);
  EXPECT_EQ(grid.occupied_count(), 1000u);  // 10^3 centres inside
  // one-voxel empty border all around
  EXPECT_GE(grid.dims.minCoeff(), 12);
  for (int a = 0; a < 3; ++a) {
    EXPECT_LT(grid.origin[a], 0.0);
    EXPECT_GT(grid.origin[a], -2.0 * grid.voxel_size);
  }
}

TEST(Voxelize, HexKeyOccupancyMatchesAnalyticVolume) {
  const VoxelGrid& grid = hex_key_model().grid;
  const double voxel_volume = std::pow(grid.voxel_size, 3);
  const double analytic = signed_volume(builtin_hex_key_mesh());
  const double occupied = static_cast<double>(grid.occupied_count());
  EXPECT_NEAR(occupied, analytic / voxel_volume,
              0.10 * analytic / voxel_volume);
}

TEST(Voxelize, RejectsBadResolution) {
  const TriangleMesh cube = make_box_mesh(Vec3::Zero(), Vec3(0.1, 0.1, 0.1));
  EXPECT_THROW(voxelize(cube, 0.0), InputError);
  EXPECT_THROW(voxelize(cube, -0.01), InputError);
  EXPECT_THROW(voxelize(cube, 1e-4, 64), ResolutionError);  // over the cap
}

TEST(Sdf, MatchesBruteForceOnRandomGrids) {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    VoxelGrid grid;
    grid.voxel_size = 0.01;
    grid.dims = Index3(9 + static_cast<int>(rng.uniform_int(4)),
                       8 + static_cast<int>(rng.uniform_int(4)),
                       7 + static_cast<int>(rng.uniform_int(4)));
    grid.occupancy.assign(
        static_cast<std::size_t>(grid.dims.prod()), 0);
    for (auto& o : grid.occupancy) o = rng.uniform() < 0.3 ? 1 : 0;
    if (grid.occupied_count() == 0 ||
        grid.occupied_count() == grid.occupancy.size())
      continue;

    const SignedDistanceField sdf = compute_sdf(grid);
    const std::vector<double> ref = brute_force_sdf(grid);
    for (std::size_t i = 0; i < ref.size(); ++i)
      EXPECT_NEAR(sdf.values[i], ref[i], 1e-12) << "voxel " << i;
  }
}

TEST(Sdf, SurfaceVoxelsKeepOccupiedSign) {
  const SignedDistanceField& sdf = hex_key_model().sdf;
  for (int z = 0; z < sdf.dims.z(); ++z)
    for (int y = 0; y < sdf.dims.y(); ++y)
      for (int x = 0; x < sdf.dims.x(); ++x) {
        const double v = sdf.value_at(x, y, z);
        EXPECT_EQ(std::signbit(v), sdf.occupied(x, y, z))
            << "at " << x << "," << y << "," << z;
      }
}

TEST(Sdf, RequiresMixedOccupancy) {
  VoxelGrid grid;
  grid.voxel_size = 0.01;
  grid.dims = Index3(4, 4, 4);
  grid.occupancy.assign(64, 0);
  EXPECT_THROW(compute_sdf(grid), DegenerateGridError);
  grid.occupancy.assign(64, 1);
  EXPECT_THROW(compute_sdf(grid), DegenerateGridError);
}

TEST(Sdf, TrilinearHandChecked) {
  VoxelGrid grid;
  grid.voxel_size = 1.0;
  grid.origin = Vec3::Zero();
  grid.dims = Index3(2, 2, 2);
  grid.occupancy.assign(8, 0);
  grid.occupancy[0] = 1;

  SignedDistanceField sdf;
  sdf.origin = grid.origin;
  sdf.voxel_size = 1.0;
  sdf.dims = grid.dims;
  sdf.occupancy = grid.occupancy;
  sdf.values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};  // f = x + 2y + 4z

  // centres sit at 0.5 and 1.5; the sample point below has local
  // coordinates (0.25, 0.5, 0.75) in the cell
  const auto v = sdf.try_sample(Vec3(0.75, 1.0, 1.25));
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 0.25 + 2.0 * 0.5 + 4.0 * 0.75, 1e-14);

  EXPECT_FALSE(sdf.try_sample(Vec3(0.4, 1.0, 1.0)).has_value());  // outside hull
  EXPECT_THROW(sdf.sample(Vec3(-1.0, 0.0, 0.0)), OutOfBoundsError);
}

TEST(Sdf, GradientMatchesIndependentFiniteDifference) {
  const SignedDistanceField& sdf = hex_key_model().sdf;
  Rng rng(123);
  int checked = 0;
  while (checked < 40) {
    // probe inside the grid, away from the sampling margin
    const Vec3 p = sdf.origin +
                   Vec3(rng.uniform(2.0, sdf.dims.x() - 2.0),
                        rng.uniform(2.0, sdf.dims.y() - 2.0),
                        rng.uniform(2.0, sdf.dims.z() - 2.0)) *
                       sdf.voxel_size;
    const double h = sdf.voxel_size / 8.0;  // different step than gradient()
    Vec3 fd;
    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      Vec3 hi = p, lo = p;
      hi[a] += h;
      lo[a] -= h;
      const auto vh = sdf.try_sample(hi), vl = sdf.try_sample(lo);
      if (!vh || !vl) {
        ok = false;
        break;
      }
      fd[a] = (*vh - *vl) / (2.0 * h);
    }
    if (!ok) continue;
    const Vec3 g = sdf.gradient(p);
    ++checked;
    if (fd.norm() < 0.5) continue;  // skidding over the medial axis
    EXPECT_LE((g - fd).norm(), 1e-3 * std::max(1.0, fd.norm()) + 0.35)
        << "probe " << p.transpose();
  }
}

TEST(Surface, CubeBlockBoundaryVoxelsExact) {
  // 4x4x4 occupied block inside an empty 8x8x8 grid: the surface is the
  // 4^3 - 2^3 = 56 boundary voxels
  VoxelGrid grid;
  grid.voxel_size = 0.01;
  grid.dims = Index3(8, 8, 8);
  grid.occupancy.assign(512, 0);
  for (int z = 2; z < 6; ++z)
    for (int y = 2; y < 6; ++y)
      for (int x = 2; x < 6; ++x) grid.occupancy[grid.linear(x, y, z)] = 1;

  const SignedDistanceField sdf = compute_sdf(grid);
  const SurfaceModel surface = extract_surface(sdf);
  EXPECT_EQ(surface.size(), 56u);
  for (const auto& pt : surface.points)
    EXPECT_NEAR(pt.normal.norm(), 1.0, 1e-12);
}

TEST(Surface, NoInteriorVoxelEverReturned) {
  const SignedDistanceField& sdf = hex_key_model().sdf;
  const SurfaceModel& surface = hex_key_model().surface;
  for (const auto& pt : surface.points) {
    const int x = pt.voxel.x(), y = pt.voxel.y(), z = pt.voxel.z();
    bool all_neighbours_occupied = true;
    const int nb[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                          {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    for (const auto& d : nb) {
      if (!sdf.occupied(x + d[0], y + d[1], z + d[2])) {
        all_neighbours_occupied = false;
        break;
      }
    }
    EXPECT_FALSE(all_neighbours_occupied);
    EXPECT_LE(std::abs(*sdf.try_sample(pt.position)),
              0.75 * sdf.voxel_size + 1e-12);
  }
}

TEST(Surface, EmptyThresholdThrows) {
  // A real SDF always has boundary voxels at distance zero, so the empty
  // case needs a hand-built field whose occupied values sit far from zero.
  SignedDistanceField sdf;
  sdf.voxel_size = 0.01;
  sdf.dims = Index3(3, 3, 3);
  sdf.occupancy.assign(27, 0);
  sdf.values.assign(27, 0.005);
  sdf.occupancy[13] = 1;  // center voxel
  sdf.values[13] = -0.005;
  EXPECT_THROW(extract_surface(sdf, 1e-3), ThresholdError);
}

// Overlap pose used by the penetration tests. Generic rotation and
// off-lattice translation keep sampled values away from exact zero, where
// the strict sign test would be at the mercy of rounding.
static RigidTransform deep_overlap_pose() {
  RigidTransform pose;
  pose.rotation =
      Eigen::AngleAxisd(0.05, Vec3(1.0, 2.0, 3.0).normalized())
          .toRotationMatrix();
  pose.translation = Vec3(0.0033, 0.0017, 0.0041);
  return pose;
}

TEST(Surface, PenetrationCountsDisjointAndOverlapping) {
  const ObjectModel& poker = poker_model();

  RigidTransform apart;
  apart.translation = Vec3(0.0, 0.0, 10.0);  // 10 m away
  EXPECT_EQ(count_penetrating(poker.sdf, RigidTransform::identity(),
                              poker.surface, apart),
            0);

  const int overlap = count_penetrating(poker.sdf, RigidTransform::identity(),
                                        poker.surface, deep_overlap_pose());
  EXPECT_GT(overlap, 100);
}

TEST(Surface, PenetrationInvariantUnderCommonRigidMotion) {
  const ObjectModel& poker = poker_model();
  Rng rng(7);

  const RigidTransform pose_b = deep_overlap_pose();
  const int base = count_penetrating(poker.sdf, RigidTransform::identity(),
                                     poker.surface, pose_b);
  EXPECT_GT(base, 0);

  for (int trial = 0; trial < 5; ++trial) {
    const RigidTransform g = testkit::random_transform(rng, 0.5);
    EXPECT_EQ(count_penetrating(poker.sdf, g, poker.surface, g * pose_b), base);
  }
}

TEST(Surface, NearestIndexMatchesExhaustiveScan) {
  const SurfaceModel& surface = hex_key_model().surface;
  const SurfaceIndex index(surface);
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 q(rng.uniform(-0.05, 0.08), rng.uniform(-0.03, 0.04),
                 rng.uniform(-0.09, 0.05));
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < surface.points.size(); ++i) {
      const double d2 = (surface.points[i].position - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    EXPECT_EQ(index.nearest(q), best) << "query " << q.transpose();
  }
}

TEST(Model, PreprocessProducesConsistentBundle) {
  const ObjectModel& m = hex_key_model();
  EXPECT_EQ(m.grid.dims, m.sdf.dims);
  EXPECT_GT(m.surface.size(), 100u);
  EXPECT_EQ(m.surface.voxel_size, m.grid.voxel_size);
  EXPECT_EQ(m.name, "hex_key");

  const GripperSpec grip = snapped_gripper(m);
  EXPECT_TRUE(grasp_validity(PlanarGraspPose{}, m.surface, grip));
}
