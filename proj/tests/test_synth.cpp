// Synthetic scenario generator and wrench-log calibration. The generator
// must produce wrenches the estimation stack can explain exactly, balanced
// forces, and contacts that actually sit on both surfaces.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "scope/cpf.hpp"
#include "scope/models.hpp"
#include "scope/scenario.hpp"
#include "scope/wrench_log.hpp"

using namespace scope;

namespace {

const ObjectModel& poker_model() {
  static const ObjectModel model = load_builtin_model("poker");
  return model;
}

const ObjectModel& tool_model() {
  static const ObjectModel model = load_builtin_model("wrench");
  return model;
}

Scenario make_scenario(unsigned seed, bool add_noise,
                       const SensorNoise& noise = SensorNoise()) {
  ScenarioParams params;
  params.add_noise = add_noise;
  params.noise = noise;
  Rng rng(seed);
  return generate_scenario(poker_model(), tool_model(),
                           snapped_gripper(poker_model()),
                           snapped_gripper(tool_model()), params, rng);
}

// Residual of the contact QP for the true contact of one arm.
double truth_residual(const ObjectModel& model, const PlanarGraspPose& pose,
                      const Vec3& point_obj, const Vec3& normal_obj,
                      const Wrench& wrench) {
  ContactParticleSet set;
  set.particles.resize(1);
  set.particles[0].location = point_obj;
  set.particles[0].normal = normal_obj;
  score_contact_particles(set, wrench, pose.transform(),
                          SensorNoise::from_sigmas(0.1, 0.001), 0.5, 8);
  return set.particles[0].qp.residual;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST(Scenario, NoiselessWrenchIsExactlyExplainedAtTruth) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Scenario sc = make_scenario(seed, false);
    EXPECT_LE(truth_residual(poker_model(), sc.poker_pose_gt,
                             sc.poker_point_obj, sc.poker_normal_obj,
                             sc.wrench_poker),
              1e-12);
    EXPECT_LE(truth_residual(tool_model(), sc.tool_pose_gt, sc.tool_point_obj,
                             sc.tool_normal_obj, sc.wrench_tool),
              1e-12);
  }
}

TEST(Scenario, ContactSitsOnBothSurfaces) {
  const Scenario sc = make_scenario(4, false);

  const double eps_p = 0.75 * poker_model().sdf.voxel_size;
  const double eps_t = 0.75 * tool_model().sdf.voxel_size;
  EXPECT_LE(std::abs(*poker_model().sdf.try_sample(sc.poker_point_obj)),
            eps_p);
  EXPECT_LE(std::abs(*tool_model().sdf.try_sample(sc.tool_point_obj)), eps_t);

  // the two arms' contact points agree in the world up to lattice snap
  const Vec3 poker_world = sc.poker_in_world().apply(sc.poker_point_obj);
  const Vec3 tool_world = sc.tool_in_world().apply(sc.tool_point_obj);
  EXPECT_LT((poker_world - sc.contact_point).norm(), 1e-12);
  EXPECT_LE((tool_world - sc.contact_point).norm(),
            3.0 * tool_model().sdf.voxel_size);

  EXPECT_NEAR(sc.contact_normal.norm(), 1.0, 1e-9);
  const Vec3 expected_normal = sc.tool_in_world().rotate(sc.tool_normal_obj);
  EXPECT_LT((sc.contact_normal - expected_normal).norm(), 1e-12);
}

TEST(Scenario, ForcesBalanceThroughBothCones) {
  for (unsigned seed : {5u, 6u, 7u}) {
    const Scenario sc = make_scenario(seed, false);

    const double magnitude = sc.applied_force.norm();
    EXPECT_GE(magnitude, 2.0 - 1e-9);
    EXPECT_LE(magnitude, 15.0 + 1e-9);

    const FrictionCone cone_tool = build_friction_cone(
        sc.tool_point_obj, sc.tool_normal_obj, 0.5, 8);
    Vec3 tool_force_obj = Vec3::Zero();
    for (int j = 0; j < sc.alpha_tool.size(); ++j) {
      EXPECT_GE(sc.alpha_tool[j], 0.0);
      tool_force_obj +=
          sc.alpha_tool[j] * cone_tool.edges[static_cast<std::size_t>(j)];
    }
    const Vec3 tool_force_world = sc.tool_in_world().rotate(tool_force_obj);
    EXPECT_LT((tool_force_world - sc.applied_force).norm(), 1e-9 * magnitude);

    const FrictionCone cone_poker = build_friction_cone(
        sc.poker_point_obj, sc.poker_normal_obj, 0.5, 8);
    Vec3 poker_force_obj = Vec3::Zero();
    for (int j = 0; j < sc.alpha_poker.size(); ++j) {
      EXPECT_GE(sc.alpha_poker[j], -1e-15);
      poker_force_obj +=
          sc.alpha_poker[j] * cone_poker.edges[static_cast<std::size_t>(j)];
    }
    const Vec3 poker_force_world = sc.poker_in_world().rotate(poker_force_obj);
    EXPECT_LE((poker_force_world + sc.applied_force).norm(),
              1e-9 * std::max(1.0, magnitude));
  }
}

TEST(Scenario, GroundTruthPosesAreGraspValidAndFramed) {
  const Scenario sc = make_scenario(8, false);
  EXPECT_TRUE(grasp_validity(sc.poker_pose_gt, poker_model().surface,
                             snapped_gripper(poker_model())));
  EXPECT_TRUE(grasp_validity(sc.tool_pose_gt, tool_model().surface,
                             snapped_gripper(tool_model())));
  EXPECT_EQ(sc.wrench_poker.frame, "poker_ee");
  EXPECT_EQ(sc.wrench_tool.frame, "tool_ee");
  EXPECT_TRUE(sc.tool_ee.rotation.isIdentity(0.0));
  EXPECT_EQ(sc.tool_ee.translation.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((sc.poker_ee.rotation - rotation_y(rad(90.0)))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(Scenario, TouchingPosesStayUnderPenetrationAllowance) {
  for (unsigned seed : {9u, 10u, 11u}) {
    const Scenario sc = make_scenario(seed, false);
    const int count =
        count_penetrating(tool_model().sdf, sc.tool_in_world(),
                          poker_model().surface, sc.poker_in_world());
    EXPECT_LE(count, 144) << "seed " << seed;
  }
}

TEST(Scenario, DeterministicPerSeed) {
  const Scenario a = make_scenario(12, false);
  const Scenario b = make_scenario(12, false);
  EXPECT_EQ(a.poker_pose_gt.x, b.poker_pose_gt.x);
  EXPECT_EQ(a.poker_pose_gt.theta, b.poker_pose_gt.theta);
  EXPECT_EQ(a.tool_pose_gt.z, b.tool_pose_gt.z);
  EXPECT_EQ((a.contact_point - b.contact_point).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a.applied_force - b.applied_force).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a.wrench_poker.stacked() - b.wrench_poker.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_EQ((a.wrench_tool.stacked() - b.wrench_tool.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);

  const Scenario c = make_scenario(13, false);
  EXPECT_GT((a.wrench_tool.stacked() - c.wrench_tool.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
}

TEST(Scenario, NoiseRidesOnTopOfTheCleanWrench) {
  const SensorNoise noise = SensorNoise::from_sigmas(0.1, 0.001);
  const Scenario clean = make_scenario(14, false);
  const Scenario noisy = make_scenario(14, true, noise);

  // same seed: identical geometry and clean wrenches, noise added on top
  EXPECT_EQ((noisy.wrench_tool_clean.stacked() - clean.wrench_tool.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_EQ((noisy.wrench_poker_clean.stacked() - clean.wrench_poker.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_GT((noisy.wrench_tool.stacked() - noisy.wrench_tool_clean.stacked())
                .cwiseAbs()
                .maxCoeff(),
            0.0);

  const Vec6 sigma = noise.variance.array().sqrt().matrix();
  const Vec6 d_tool =
      (noisy.wrench_tool.stacked() - noisy.wrench_tool_clean.stacked());
  const Vec6 d_poker =
      (noisy.wrench_poker.stacked() - noisy.wrench_poker_clean.stacked());
  for (int i = 0; i < 6; ++i) {
    EXPECT_LE(std::abs(d_tool[i]), 6.0 * sigma[i]);
    EXPECT_LE(std::abs(d_poker[i]), 6.0 * sigma[i]);
  }
}

TEST(Scenario, AddedNoiseHasDeclaredMoments) {
  const SensorNoise noise = SensorNoise::from_sigmas(0.2, 0.002);
  const Wrench clean(Vec3(1, 2, 3), Vec3(0.1, -0.2, 0.3), "ee");
  Rng rng(15);
  const int n = 20000;
  Vec6 sum = Vec6::Zero(), sum2 = Vec6::Zero();
  for (int k = 0; k < n; ++k) {
    const Vec6 d = add_wrench_noise(clean, noise, rng).stacked() -
                   clean.stacked();
    sum += d;
    sum2 += d.cwiseProduct(d);
  }
  const Vec6 mean = sum / n;
  const Vec6 var = sum2 / n - mean.cwiseProduct(mean);
  for (int i = 0; i < 6; ++i) {
    const double sigma = std::sqrt(noise.variance[i]);
    EXPECT_LE(std::abs(mean[i]), 5.0 * sigma / std::sqrt(double(n)));
    EXPECT_NEAR(std::sqrt(var[i]), sigma, 0.05 * sigma);
  }
}

TEST(Scenario, RejectsBadParams) {
  ScenarioParams bad;
  bad.force_min = 10.0;
  bad.force_max = 5.0;
  EXPECT_THROW(bad.check(), InputError);

  ScenarioParams bad_mu;
  bad_mu.mu = 0.0;
  EXPECT_THROW(bad_mu.check(), InputError);

  ScenarioParams params;
  Rng rng(1);
  ObjectModel empty;
  EXPECT_THROW(generate_scenario(empty, tool_model(), GripperSpec{},
                                 GripperSpec{}, params, rng),
               InputError);
}

TEST(WrenchLog, LoadsDeclaredUnitsAndFrame) {
  const std::string path = write_temp("log_basic.csv",
                                      "# experiment notes, ignored\n"
                                      "# units: N, N*m, s; frame: tool_ee\n"
                                      "0.00,1,2,3,0.1,0.2,0.3\n"
                                      "0.01,1,2,3,0.1,0.2,0.3\n"
                                      "0.02,4,5,6,0.4,0.5,0.6\n");
  const WrenchLog log = load_wrench_log(path, "tool_ee");
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log.frame, "tool_ee");
  EXPECT_DOUBLE_EQ(log.timestamps[1], 0.01);
  EXPECT_DOUBLE_EQ(log.samples[2][0], 4.0);
  EXPECT_DOUBLE_EQ(log.samples[2][5], 0.6);

  EXPECT_THROW(load_wrench_log(path, "poker_ee"), FrameError);
  EXPECT_THROW(load_wrench_log("/tmp/does_not_exist.csv"), InputError);
}

TEST(WrenchLog, MilliUnitsScaleOnLoad) {
  const std::string path = write_temp("log_milli.csv",
                                      "# units: mN, mNm, ms; frame: ft\n"
                                      "1000,2000,0,0,500,0,0\n"
                                      "2000,2000,0,0,500,0,0\n");
  const WrenchLog log = load_wrench_log(path);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_DOUBLE_EQ(log.timestamps[0], 1.0);   // ms -> s
  EXPECT_DOUBLE_EQ(log.samples[0][0], 2.0);   // mN -> N
  EXPECT_DOUBLE_EQ(log.samples[0][3], 0.5);   // mN*m -> N*m
}

TEST(WrenchLog, ParseErrorsCarryLineNumbers) {
  const std::string five = write_temp("log_five.csv",
                                      "# units: N, Nm, s; frame: ft\n"
                                      "0,1,2,3,0.1,0.2,0.3\n"
                                      "1,1,2,3,0.1\n");
  try {
    load_wrench_log(five);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos)
        << e.what();
  }

  const std::string headerless = write_temp("log_nohdr.csv",
                                            "0,1,2,3,0.1,0.2,0.3\n");
  EXPECT_THROW(load_wrench_log(headerless), ParseError);

  const std::string backwards = write_temp("log_backwards.csv",
                                           "# units: N, Nm, s; frame: ft\n"
                                           "1,1,2,3,0.1,0.2,0.3\n"
                                           "1,1,2,3,0.1,0.2,0.3\n");
  EXPECT_THROW(load_wrench_log(backwards), ParseError);

  const std::string bad_unit = write_temp("log_badunit.csv",
                                          "# units: kN, Nm, s; frame: ft\n"
                                          "0,1,2,3,0.1,0.2,0.3\n");
  EXPECT_THROW(load_wrench_log(bad_unit), ParseError);

  const std::string not_num = write_temp("log_nan.csv",
                                         "# units: N, Nm, s; frame: ft\n"
                                         "0,1,xyz,3,0.1,0.2,0.3\n");
  EXPECT_THROW(load_wrench_log(not_num), ParseError);
}

namespace {

WrenchLog synthetic_log(double sigma_f, double sigma_m, std::size_t n,
                        unsigned seed, const Vec6& bias = Vec6::Zero()) {
  WrenchLog log;
  log.frame = "ft";
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    log.timestamps.push_back(static_cast<double>(i) * 0.001);
    Vec6 s = bias;
    for (int k = 0; k < 3; ++k) s[k] += rng.normal(0.0, sigma_f);
    for (int k = 3; k < 6; ++k) s[k] += rng.normal(0.0, sigma_m);
    log.samples.push_back(s);
  }
  return log;
}

}  // namespace

TEST(Calibration, RecoversKnownVariance) {
  const double sigma_f = 0.2, sigma_m = 0.01;  // variances 0.04, 1e-4
  const WrenchLog log = synthetic_log(sigma_f, sigma_m, 10000, 16);
  const SensorNoise noise = calibrate_sigma(log, 0.0, 100.0);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(noise.variance[i], sigma_f * sigma_f,
                0.05 * sigma_f * sigma_f);
  for (int i = 3; i < 6; ++i)
    EXPECT_NEAR(noise.variance[i], sigma_m * sigma_m,
                0.05 * sigma_m * sigma_m);
}

TEST(Calibration, InvariantToConstantBias) {
  Vec6 bias;
  bias << 5, -3, 9.81, 0.4, -0.2, 0.1;
  const WrenchLog centered = synthetic_log(0.1, 0.005, 5000, 17);
  const WrenchLog biased = synthetic_log(0.1, 0.005, 5000, 17, bias);
  const SensorNoise a = calibrate_sigma(centered, 0.0, 100.0);
  const SensorNoise b = calibrate_sigma(biased, 0.0, 100.0);
  for (int i = 0; i < 6; ++i)
    EXPECT_NEAR(a.variance[i], b.variance[i], 1e-9 * a.variance[i] + 1e-15);
}

TEST(Calibration, ConstantLogFallsToFloors) {
  WrenchLog log;
  for (std::size_t i = 0; i < 100; ++i) {
    log.timestamps.push_back(static_cast<double>(i));
    Vec6 s;
    s << 1, 2, 3, 0.1, 0.2, 0.3;
    log.samples.push_back(s);
  }
  const SensorNoise noise = calibrate_sigma(log, 0.0, 1000.0);
  for (int i = 0; i < 3; ++i)
    EXPECT_DOUBLE_EQ(noise.variance[i], SensorNoise::kForceVarFloor);
  for (int i = 3; i < 6; ++i)
    EXPECT_DOUBLE_EQ(noise.variance[i], SensorNoise::kMomentVarFloor);
}

TEST(Calibration, ShortWindowThrows) {
  const WrenchLog log = synthetic_log(0.1, 0.005, 100, 18);
  EXPECT_THROW(calibrate_sigma(log, 0.0, 0.005), InputError);  // ~6 samples
  EXPECT_THROW(calibrate_sigma(log, 1.0, 0.5), InputError);    // empty window
}

TEST(Calibration, SteadyWindowFindsTheQuietStretch) {
  // loud for 2 s, quiet for 3 s, loud again
  WrenchLog log;
  Rng rng(19);
  for (std::size_t i = 0; i < 7000; ++i) {
    const double t = static_cast<double>(i) * 0.001;
    const double sigma = (t >= 2.0 && t < 5.0) ? 0.01 : 1.0;
    log.timestamps.push_back(t);
    Vec6 s;
    for (int k = 0; k < 6; ++k) s[k] = rng.normal(0.0, sigma);
    log.samples.push_back(s);
  }
  const auto [t0, t1] = suggest_steady_window(log, 2.0);
  EXPECT_GE(t0, 2.0 - 1e-9);
  EXPECT_LE(t1, 5.0 + 1e-9);
  EXPECT_NEAR(t1 - t0, 2.0, 1e-9);

  const WrenchLog tiny = synthetic_log(0.1, 0.005, 10, 20);
  EXPECT_THROW(suggest_steady_window(tiny, 60.0), InputError);
}
