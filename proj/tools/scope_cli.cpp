// Batch driver for the estimation library: preprocess meshes into model
// bundles, calibrate sensor noise from wrench logs, and run contact-filter /
// pose-filter experiments (single runs, loss ablations, parameter sweeps)
// against the built-in synthetic scenario generator.
//
// All data goes to files under --out; progress goes to stderr. Exit codes:
// 0 success, 2 configuration error, 3 compute or input-data error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scope/scope.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scope;

namespace {

// ---------------------------------------------------------------------------
// formatting and small helpers

std::string g17(double v) {
  if (std::isnan(v)) return "na";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + value +
                      "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + value +
                      "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + value +
                    "'");
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(parse_int(key, item.substr(a, b - a + 1)));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  const auto b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string(what) + ": cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// experiment configuration

struct ExperimentConfig {
  // models and run control
  std::string poker_model = "builtin:poker";
  std::string tool_model = "builtin:wrench";
  double voxel_size = 0.002;  // m, for builtin models and preprocess
  double gripper_tolerance = 1e-3;
  unsigned seed = 1;
  int trials = 1;
  int jobs = 1;
  std::string out;
  std::string loss_mask = "PCF";

  ScopeParams scope;

  // sensor noise, shared by the scenario generator and the estimators
  double noise_sigma_f = 0.1;    // N
  double noise_sigma_m = 0.001;  // N*m

  // synthetic scenario generation
  double scenario_force_min = 2.0;
  double scenario_force_max = 15.0;
  double scenario_aim_z = 0.04;
  double scenario_tilt_max_deg = 10.0;
  bool scenario_add_noise = true;

  // preprocess
  std::string mesh;
  std::string model_name;
  int axis_cap = 256;
  double radius_of_gyration_cm = 5.0;

  // calibrate
  std::string wrench_log;
  std::string expected_frame;
  double window_begin = std::numeric_limits<double>::quiet_NaN();
  double window_end = std::numeric_limits<double>::quiet_NaN();
  double window_duration = 2.0;
  int min_samples = 30;

  // sweep
  std::string sweep_n_clp = "10,20";
  std::string sweep_n_opp = "5,10";

  void apply(const std::string& key, const std::string& value) {
    if (key == "poker_model") poker_model = value;
    else if (key == "tool_model") tool_model = value;
    else if (key == "voxel_size") voxel_size = parse_double(key, value);
    else if (key == "gripper_tolerance") gripper_tolerance = parse_double(key, value);
    else if (key == "seed") seed = static_cast<unsigned>(parse_int(key, value));
    else if (key == "trials") trials = parse_int(key, value);
    else if (key == "jobs") jobs = parse_int(key, value);
    else if (key == "out") out = value;
    else if (key == "loss_mask") loss_mask = value;
    else if (key == "n_opp") scope.n_opp = parse_int(key, value);
    else if (key == "n_os") scope.n_os = parse_int(key, value);
    else if (key == "noise_redraws") scope.noise_redraws = parse_int(key, value);
    else if (key == "pose_sigma_x") scope.pose_sigma.x() = parse_double(key, value);
    else if (key == "pose_sigma_z") scope.pose_sigma.y() = parse_double(key, value);
    else if (key == "pose_sigma_theta_deg") scope.pose_sigma.z() = rad(parse_double(key, value));
    else if (key == "cap_t_max") scope.caps.t_max = parse_double(key, value);
    else if (key == "cap_r_max_deg") scope.caps.r_max = rad(parse_double(key, value));
    else if (key == "init_poker_x") scope.init_center_poker.x = parse_double(key, value);
    else if (key == "init_poker_z") scope.init_center_poker.z = parse_double(key, value);
    else if (key == "init_poker_theta_deg") scope.init_center_poker.theta = rad(parse_double(key, value));
    else if (key == "init_tool_x") scope.init_center_tool.x = parse_double(key, value);
    else if (key == "init_tool_z") scope.init_center_tool.z = parse_double(key, value);
    else if (key == "init_tool_theta_deg") scope.init_center_tool.theta = rad(parse_double(key, value));
    else if (key == "n_clp") scope.cpf.n_clp = parse_int(key, value);
    else if (key == "n_cs") scope.cpf.n_cs = parse_int(key, value);
    else if (key == "n_f") scope.cpf.n_f = parse_int(key, value);
    else if (key == "mu") scope.cpf.mu = parse_double(key, value);
    else if (key == "motion_sigma") scope.cpf.motion_sigma = parse_double(key, value);
    else if (key == "motion_anneal") scope.cpf.motion_anneal = parse_double(key, value);
    else if (key == "resample_threshold") scope.cpf.resample_threshold = parse_double(key, value);
    else if (key == "eta_p") scope.weights.eta_p = parse_double(key, value);
    else if (key == "eta_c") scope.weights.eta_c = parse_double(key, value);
    else if (key == "eps_pp") scope.weights.eps_pp = parse_double(key, value);
    else if (key == "lambda") scope.weights.lambda = parse_double(key, value);
    else if (key == "noise_sigma_f") noise_sigma_f = parse_double(key, value);
    else if (key == "noise_sigma_m") noise_sigma_m = parse_double(key, value);
    else if (key == "scenario_force_min") scenario_force_min = parse_double(key, value);
    else if (key == "scenario_force_max") scenario_force_max = parse_double(key, value);
    else if (key == "scenario_aim_z") scenario_aim_z = parse_double(key, value);
    else if (key == "scenario_tilt_max_deg") scenario_tilt_max_deg = parse_double(key, value);
    else if (key == "scenario_add_noise") scenario_add_noise = parse_bool(key, value);
    else if (key == "mesh") mesh = value;
    else if (key == "model_name") model_name = value;
    else if (key == "axis_cap") axis_cap = parse_int(key, value);
    else if (key == "radius_of_gyration_cm") radius_of_gyration_cm = parse_double(key, value);
    else if (key == "wrench_log") wrench_log = value;
    else if (key == "expected_frame") expected_frame = value;
    else if (key == "window_begin") window_begin = parse_double(key, value);
    else if (key == "window_end") window_end = parse_double(key, value);
    else if (key == "window_duration") window_duration = parse_double(key, value);
    else if (key == "min_samples") min_samples = parse_int(key, value);
    else if (key == "sweep_n_clp") sweep_n_clp = value;
    else if (key == "sweep_n_opp") sweep_n_opp = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
};

// Parses "key = value" lines; '#' starts a comment. Returns the raw file
// bytes so the run can echo its exact configuration for provenance.
std::string load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::string raw;
  try {
    raw = read_text_file(path, "config");
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::istringstream in(raw);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    try {
      cfg.apply(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (line " +
                        std::to_string(line_no) + ")");
    }
  }
  return raw;
}

LossMask parse_loss_mask(const std::string& text) {
  LossMask mask;
  mask.penetration = mask.contact = mask.force = false;
  if (text.empty()) throw ConfigError("loss_mask: must not be empty");
  for (char c : text) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'P': mask.penetration = true; break;
      case 'C': mask.contact = true; break;
      case 'F': mask.force = true; break;
      default:
        throw ConfigError(std::string("loss_mask: unknown term '") + c +
                          "' (want a subset of PCF)");
    }
  }
  return mask;
}

ScenarioParams scenario_params(const ExperimentConfig& cfg) {
  ScenarioParams sp;
  sp.mu = cfg.scope.cpf.mu;
  sp.n_f = cfg.scope.cpf.n_f;
  sp.force_min = cfg.scenario_force_min;
  sp.force_max = cfg.scenario_force_max;
  sp.caps = cfg.scope.caps;
  sp.aim_z = cfg.scenario_aim_z;
  sp.tilt_max = rad(cfg.scenario_tilt_max_deg);
  sp.add_noise = cfg.scenario_add_noise;
  sp.noise = SensorNoise::from_sigmas(cfg.noise_sigma_f, cfg.noise_sigma_m);
  return sp;
}

// Parameter-struct validation counts as configuration checking: rewrap the
// library's InputError so these fail with exit code 2 before any compute.
void validate_run_config(const ExperimentConfig& cfg) {
  if (cfg.out.empty())
    throw ConfigError("output directory required (--out or 'out = ...')");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(cfg.voxel_size > 0.0)) throw ConfigError("voxel_size must be > 0");
  if (!(cfg.noise_sigma_f >= 0.0) || !(cfg.noise_sigma_m >= 0.0))
    throw ConfigError("noise sigmas must be >= 0");
  try {
    ScopeParams params = cfg.scope;
    params.mask = parse_loss_mask(cfg.loss_mask);
    params.check();
    scenario_params(cfg).check();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// model bundles

ObjectModel load_bundle(const std::string& dir) {
  const fs::path base(dir);
  const json meta = json::parse(read_text_file((base / "bundle.json").string(),
                                               "model bundle"));
  ObjectModel model;
  model.name = meta.at("name").get<std::string>();
  model.radius_of_gyration_cm = meta.at("radius_of_gyration_cm").get<double>();
  model.sdf = load_scvx_sdf(
      (base / meta.at("files").at("sdf").get<std::string>()).string());
  model.grid = load_scvx_grid(
      (base / meta.at("files").at("grid").get<std::string>()).string());

  const std::string surf_path =
      (base / meta.at("files").at("surface").get<std::string>()).string();
  std::istringstream in(read_text_file(surf_path, "surface file"));
  model.surface.voxel_size = meta.at("voxel_size").get<double>();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    SurfacePoint pt;
    double f[6] = {};
    int ix = 0, iy = 0, iz = 0;
    std::istringstream row(line);
    std::string field;
    int k = 0;
    for (; std::getline(row, field, ','); ++k) {
      if (k >= 9) break;
      try {
        if (k < 6) f[k] = std::stod(field);
        else if (k == 6) ix = std::stoi(field);
        else if (k == 7) iy = std::stoi(field);
        else iz = std::stoi(field);
      } catch (const std::exception&) {
        k = -1;
        break;
      }
    }
    if (k != 9)
      throw ParseError("surface file row needs 9 comma-separated fields",
                       line_no);
    pt.position = Vec3(f[0], f[1], f[2]);
    pt.normal = Vec3(f[3], f[4], f[5]);
    pt.voxel = Index3(ix, iy, iz);
    model.surface.points.push_back(pt);
  }
  if (model.surface.points.empty())
    throw Error("surface file has no points: " + surf_path);
  return model;
}

ObjectModel resolve_model(const std::string& spec, const ExperimentConfig& cfg) {
  if (spec.rfind("builtin:", 0) == 0)
    return load_builtin_model(spec.substr(8), cfg.voxel_size);
  if (is_builtin_model_name(spec))
    return load_builtin_model(spec, cfg.voxel_size);
  return load_bundle(spec);
}

// ---------------------------------------------------------------------------
// trial runners

struct TrialStats {
  std::vector<std::string> names;       // numeric column names
  std::vector<std::vector<double>> rows;

  void append_summary(std::ostream& out, int lead_columns) const {
    const std::size_t n = rows.size();
    std::vector<double> mean(names.size(), 0.0), sd(names.size(), 0.0);
    for (std::size_t c = 0; c < names.size(); ++c) {
      double s = 0.0;
      for (const auto& r : rows) s += r[c];
      mean[c] = s / static_cast<double>(n);
      if (n >= 2) {
        double q = 0.0;
        for (const auto& r : rows) q += (r[c] - mean[c]) * (r[c] - mean[c]);
        sd[c] = std::sqrt(q / static_cast<double>(n - 1));
      } else {
        sd[c] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out << "mean";
    for (int k = 1; k < lead_columns; ++k) out << ",na";
    for (double v : mean) out << ',' << g17(v);
    out << "\nstdev";
    for (int k = 1; k < lead_columns; ++k) out << ",na";
    for (double v : sd) out << ',' << g17(v);
    out << "\n";
  }

  double mean_of(const std::string& name) const {
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c] == name) {
        double s = 0.0;
        for (const auto& r : rows) s += r[c];
        return s / static_cast<double>(rows.size());
      }
    throw Error("no such stat column: " + name);
  }

  double stdev_of(const std::string& name) const {
    for (std::size_t c = 0; c < names.size(); ++c)
      if (names[c] == name) {
        if (rows.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (const auto& r : rows) s += r[c];
        const double m = s / static_cast<double>(rows.size());
        double q = 0.0;
        for (const auto& r : rows) q += (r[c] - m) * (r[c] - m);
        return std::sqrt(q / static_cast<double>(rows.size() - 1));
      }
    throw Error("no such stat column: " + name);
  }
};

std::mutex io_mutex;

void progress(const std::string& line) {
  std::lock_guard<std::mutex> lock(io_mutex);
  std::cerr << line << "\n";
}

// Runs fn(trial_index) across a worker pool; the first exception wins and is
// rethrown after all workers drain.
template <typename Fn>
void run_trial_pool(int trials, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, trials));
  if (jobs == 1) {
    for (int k = 0; k < trials; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int k; (k = next.fetch_add(1)) < trials;) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ScopeTrialResult {
  unsigned seed = 0;
  double trans_poker_cm = 0.0, rot_poker_deg = 0.0;
  double trans_tool_cm = 0.0, rot_tool_deg = 0.0;
  double e_agg_cm = 0.0;
  LossTerms final_losses;  // NaN where masked
  double wall_ms = 0.0;
  std::vector<ScopeIterationRecord> history;
};

ScopeTrialResult run_scope_trial(const ExperimentConfig& cfg,
                                 const ObjectModel& poker,
                                 const ObjectModel& tool,
                                 const ScopeParams& params, int trial) {
  ScopeTrialResult res;
  res.seed = cfg.seed + static_cast<unsigned>(trial);
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(res.seed);
  const GripperSpec grip_p =
      snapped_gripper(poker, Vec3::Zero(), cfg.gripper_tolerance);
  const GripperSpec grip_t =
      snapped_gripper(tool, Vec3::Zero(), cfg.gripper_tolerance);
  const Scenario sc = generate_scenario(poker, tool, grip_p, grip_t,
                                        scenario_params(cfg), rng);

  const SensorNoise noise =
      SensorNoise::from_sigmas(cfg.noise_sigma_f, cfg.noise_sigma_m);
  const ScopeArmInput arm_p{&poker, grip_p, sc.poker_ee, sc.wrench_poker,
                            noise};
  const ScopeArmInput arm_t{&tool, grip_t, sc.tool_ee, sc.wrench_tool, noise};
  const GroundTruthPoses truth{sc.poker_pose_gt, sc.tool_pose_gt};

  const ScopeResult result = run_scope(arm_p, arm_t, params, rng, truth);

  double tp = 0.0, rp = 0.0, tt = 0.0, rt = 0.0, ea = 0.0;
  for (const auto& pr : result.pairs) {
    const PoseErrors ep = pose_errors(pr.poker, truth.poker);
    const PoseErrors et = pose_errors(pr.tool, truth.tool);
    tp += ep.translation_cm;
    rp += ep.rotation_deg;
    tt += et.translation_cm;
    rt += et.rotation_deg;
    ea += aggregate_error(ep, et, poker.radius_of_gyration_cm,
                          tool.radius_of_gyration_cm);
  }
  const double m = static_cast<double>(result.pairs.size());
  res.trans_poker_cm = tp / m;
  res.rot_poker_deg = rp / m;
  res.trans_tool_cm = tt / m;
  res.rot_tool_deg = rt / m;
  res.e_agg_cm = ea / m;
  res.final_losses.penetration = std::numeric_limits<double>::quiet_NaN();
  res.final_losses.contact = std::numeric_limits<double>::quiet_NaN();
  res.final_losses.force = std::numeric_limits<double>::quiet_NaN();
  if (!result.history.empty()) res.final_losses = result.history.back().mean_losses;
  res.history = result.history;

  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// Shared by run-scope, ablation and sweep: run the trial loop for one
// parameter set, write trials.csv / timing.csv (and optionally per-trial
// history), and return the per-trial stats.
TrialStats run_scope_batch(const ExperimentConfig& cfg,
                           const ObjectModel& poker, const ObjectModel& tool,
                           const ScopeParams& params, const fs::path& dir,
                           bool write_history, const std::string& tag) {
  fs::create_directories(dir);
  std::vector<ScopeTrialResult> results(
      static_cast<std::size_t>(cfg.trials));
  run_trial_pool(cfg.trials, cfg.jobs, [&](int k) {
    results[static_cast<std::size_t>(k)] =
        run_scope_trial(cfg, poker, tool, params, k);
    const auto& r = results[static_cast<std::size_t>(k)];
    std::ostringstream msg;
    msg << "[" << tag << " trial " << (k + 1) << "/" << cfg.trials
        << "] seed " << r.seed << "  e_agg " << std::fixed
        << std::setprecision(2) << r.e_agg_cm << " cm  ("
        << static_cast<long>(r.wall_ms) << " ms)";
    progress(msg.str());
  });

  std::ostringstream trials_csv;
  trials_csv << "# per-trial pose-pair estimation results; units: cm, deg; "
                "losses unitless (na = masked off); wall time in timing.csv\n"
             << "trial,seed,trans_poker_cm,rot_poker_deg,trans_tool_cm,"
                "rot_tool_deg,e_agg_cm,loss_penetration,loss_contact,"
                "loss_force\n";
  std::ostringstream timing_csv;
  timing_csv << "# wall-clock per trial; units: ms\n"
             << "trial,seed,wall_ms\n";

  TrialStats stats;
  stats.names = {"trans_poker_cm", "rot_poker_deg", "trans_tool_cm",
                 "rot_tool_deg", "e_agg_cm"};
  for (int k = 0; k < cfg.trials; ++k) {
    const auto& r = results[static_cast<std::size_t>(k)];
    trials_csv << k << ',' << r.seed << ',' << g17(r.trans_poker_cm) << ','
               << g17(r.rot_poker_deg) << ',' << g17(r.trans_tool_cm) << ','
               << g17(r.rot_tool_deg) << ',' << g17(r.e_agg_cm) << ','
               << g17(r.final_losses.penetration) << ','
               << g17(r.final_losses.contact) << ','
               << g17(r.final_losses.force) << "\n";
    timing_csv << k << ',' << r.seed << ',' << g17(r.wall_ms) << "\n";
    stats.rows.push_back({r.trans_poker_cm, r.rot_poker_deg, r.trans_tool_cm,
                          r.rot_tool_deg, r.e_agg_cm});
    if (write_history) {
      std::ofstream hist(dir / ("history_trial" + std::to_string(k) +
                                ".jsonl"));
      write_scope_history(hist, r.history);
    }
  }

  std::ostringstream with_summary;
  with_summary << trials_csv.str();
  {
    // summary covers the numeric error columns; loss columns may hold na
    std::ostringstream tmp;
    stats.append_summary(tmp, 2);
    std::istringstream lines(tmp.str());
    std::string line;
    while (std::getline(lines, line))
      with_summary << line << ",na,na,na\n";
  }
  write_text_file(dir / "trials.csv", with_summary.str());
  write_text_file(dir / "timing.csv", timing_csv.str());
  return stats;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_preprocess(const ExperimentConfig& cfg) {
  if (cfg.out.empty())
    throw ConfigError("output directory required (--out or 'out = ...')");
  if (cfg.mesh.empty())
    throw ConfigError("preprocess: 'mesh = <path or builtin:name>' required");
  if (!(cfg.voxel_size > 0.0)) throw ConfigError("voxel_size must be > 0");

  TriangleMesh mesh;
  std::string hash_input;
  std::string name = cfg.model_name;
  double radius = cfg.radius_of_gyration_cm;
  if (cfg.mesh.rfind("builtin:", 0) == 0) {
    const std::string which = cfg.mesh.substr(8);
    mesh = builtin_mesh(which);
    hash_input = "builtin:" + which;
    if (name.empty()) name = which;
    radius = builtin_radius_of_gyration_cm(which);
  } else {
    mesh = load_mesh(cfg.mesh);
    hash_input = read_text_file(cfg.mesh, "mesh");
    if (name.empty()) name = fs::path(cfg.mesh).stem().string();
  }
  hash_input += "\nvoxel_size=" + g17(cfg.voxel_size) +
                "\naxis_cap=" + std::to_string(cfg.axis_cap) +
                "\nradius=" + g17(radius);
  const std::string hash = "fnv1a64:" + hex64(fnv1a64(hash_input));

  const fs::path dir = fs::path(cfg.out) / name;
  const fs::path meta_path = dir / "bundle.json";
  if (fs::exists(meta_path)) {
    try {
      const json meta = json::parse(read_text_file(meta_path.string(),
                                                   "model bundle"));
      if (meta.at("content_hash").get<std::string>() == hash &&
          fs::exists(dir / "grid.scvx") && fs::exists(dir / "sdf.scvx") &&
          fs::exists(dir / "surface.csv")) {
        std::cerr << "preprocess: skipped (up to date): " << dir.string()
                  << "\n";
        return 0;
      }
    } catch (const std::exception&) {
      // fall through and rebuild
    }
  }

  const ObjectModel model =
      preprocess_model(name, mesh, cfg.voxel_size, -1.0, cfg.axis_cap);
  fs::create_directories(dir);
  save_scvx(model.grid, (dir / "grid.scvx").string());
  save_scvx(model.sdf, (dir / "sdf.scvx").string());

  std::ostringstream surface;
  surface << "# surface points; units: m; columns: x,y,z,nx,ny,nz,ix,iy,iz\n";
  for (const auto& pt : model.surface.points)
    surface << g17(pt.position.x()) << ',' << g17(pt.position.y()) << ','
            << g17(pt.position.z()) << ',' << g17(pt.normal.x()) << ','
            << g17(pt.normal.y()) << ',' << g17(pt.normal.z()) << ','
            << pt.voxel.x() << ',' << pt.voxel.y() << ',' << pt.voxel.z()
            << "\n";
  write_text_file(dir / "surface.csv", surface.str());

  json meta;
  meta["name"] = name;
  meta["content_hash"] = hash;
  meta["voxel_size"] = cfg.voxel_size;
  meta["axis_cap"] = cfg.axis_cap;
  meta["radius_of_gyration_cm"] = radius;
  meta["files"] = {{"grid", "grid.scvx"},
                   {"sdf", "sdf.scvx"},
                   {"surface", "surface.csv"}};
  write_text_file(meta_path, meta.dump(2) + "\n");

  std::cerr << "preprocess: wrote 3 artifacts (" << model.surface.size()
            << " surface points, dims " << model.sdf.dims.x() << "x"
            << model.sdf.dims.y() << "x" << model.sdf.dims.z() << ") to "
            << dir.string() << "\n";
  return 0;
}

int cmd_calibrate(const ExperimentConfig& cfg) {
  if (cfg.out.empty())
    throw ConfigError("output directory required (--out or 'out = ...')");
  if (cfg.wrench_log.empty())
    throw ConfigError("calibrate: 'wrench_log = <path>' required");
  if (cfg.min_samples < 2) throw ConfigError("min_samples must be >= 2");

  const WrenchLog log = load_wrench_log(cfg.wrench_log, cfg.expected_frame);
  double t0 = cfg.window_begin, t1 = cfg.window_end;
  if (std::isnan(t0) || std::isnan(t1)) {
    const auto window = suggest_steady_window(
        log, cfg.window_duration, static_cast<std::size_t>(cfg.min_samples));
    t0 = window.first;
    t1 = window.second;
    std::cerr << "calibrate: steady window [" << g17(t0) << ", " << g17(t1)
              << "] s\n";
  }
  const SensorNoise noise = calibrate_sigma(
      log, t0, t1, static_cast<std::size_t>(cfg.min_samples));

  fs::create_directories(cfg.out);
  json out;
  out["frame"] = log.frame;
  out["window_begin_s"] = t0;
  out["window_end_s"] = t1;
  out["samples"] = log.size();
  for (int i = 0; i < 6; ++i) {
    out["variance"].push_back(noise.variance[i]);
    out["sigma"].push_back(std::sqrt(noise.variance[i]));
  }
  write_text_file(fs::path(cfg.out) / "noise.json", out.dump(2) + "\n");
  std::cerr << "calibrate: sigma_f ["
            << g17(std::sqrt(noise.variance[0])) << ", "
            << g17(std::sqrt(noise.variance[1])) << ", "
            << g17(std::sqrt(noise.variance[2])) << "] N -> "
            << (fs::path(cfg.out) / "noise.json").string() << "\n";
  return 0;
}

int cmd_run_cpfgrasp(const ExperimentConfig& cfg, const std::string& raw) {
  validate_run_config(cfg);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  write_text_file(dir / "config.txt", raw);

  const ObjectModel poker = resolve_model(cfg.poker_model, cfg);
  const ObjectModel tool = resolve_model(cfg.tool_model, cfg);

  struct Row {
    unsigned seed;
    double poker_err_mm, tool_err_mm, poker_r_min, tool_r_min, wall_ms;
    json beliefs;
  };
  std::vector<Row> rows(static_cast<std::size_t>(cfg.trials));

  run_trial_pool(cfg.trials, cfg.jobs, [&](int k) {
    Row& row = rows[static_cast<std::size_t>(k)];
    row.seed = cfg.seed + static_cast<unsigned>(k);
    const auto t0 = std::chrono::steady_clock::now();

    Rng rng(row.seed);
    const GripperSpec grip_p =
        snapped_gripper(poker, Vec3::Zero(), cfg.gripper_tolerance);
    const GripperSpec grip_t =
        snapped_gripper(tool, Vec3::Zero(), cfg.gripper_tolerance);
    const Scenario sc = generate_scenario(poker, tool, grip_p, grip_t,
                                          scenario_params(cfg), rng);
    const SensorNoise noise =
        SensorNoise::from_sigmas(cfg.noise_sigma_f, cfg.noise_sigma_m);

    auto localise = [&](const ObjectModel& model, const Wrench& wrench,
                        const PlanarGraspPose& pose_gt,
                        const Vec3& point_gt, double* err_mm, double* r_min,
                        json* belief) {
      const ContactParticleSet set =
          cpfgrasp(wrench, pose_gt.transform(), model.surface, model.sdf,
                   noise, cfg.scope.cpf, rng);
      Vec3 mean = Vec3::Zero();
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : set.particles) {
        mean += p.likelihood * p.location;
        best = std::min(best, p.qp.residual);
      }
      *err_mm = (mean - point_gt).norm() * 1000.0;
      *r_min = best;
      *belief = to_json(set);
    };

    json belief_p, belief_t;
    localise(poker, sc.wrench_poker, sc.poker_pose_gt, sc.poker_point_obj,
             &row.poker_err_mm, &row.poker_r_min, &belief_p);
    localise(tool, sc.wrench_tool, sc.tool_pose_gt, sc.tool_point_obj,
             &row.tool_err_mm, &row.tool_r_min, &belief_t);
    row.beliefs = json{{"trial", k},
                       {"seed", row.seed},
                       {"poker", belief_p},
                       {"tool", belief_t}};
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::ostringstream msg;
    msg << "[cpfgrasp trial " << (k + 1) << "/" << cfg.trials << "] seed "
        << row.seed << "  poker " << std::fixed << std::setprecision(2)
        << row.poker_err_mm << " mm, tool " << row.tool_err_mm << " mm";
    progress(msg.str());
  });

  std::ostringstream trials_csv, timing_csv, beliefs;
  trials_csv << "# contact localisation at the true in-hand pose; units: mm "
                "(weighted-mean error), min whitened squared residual; wall "
                "time in timing.csv\n"
             << "trial,seed,poker_err_mm,tool_err_mm,poker_min_residual,"
                "tool_min_residual\n";
  timing_csv << "# wall-clock per trial; units: ms\n"
             << "trial,seed,wall_ms\n";
  TrialStats stats;
  stats.names = {"poker_err_mm", "tool_err_mm"};
  for (int k = 0; k < cfg.trials; ++k) {
    const Row& r = rows[static_cast<std::size_t>(k)];
    trials_csv << k << ',' << r.seed << ',' << g17(r.poker_err_mm) << ','
               << g17(r.tool_err_mm) << ',' << g17(r.poker_r_min) << ','
               << g17(r.tool_r_min) << "\n";
    timing_csv << k << ',' << r.seed << ',' << g17(r.wall_ms) << "\n";
    beliefs << r.beliefs.dump() << "\n";
    stats.rows.push_back({r.poker_err_mm, r.tool_err_mm});
  }
  {
    std::ostringstream tmp;
    stats.append_summary(tmp, 2);
    std::istringstream lines(tmp.str());
    std::string line;
    while (std::getline(lines, line)) trials_csv << line << ",na,na\n";
  }
  write_text_file(dir / "trials.csv", trials_csv.str());
  write_text_file(dir / "timing.csv", timing_csv.str());
  write_text_file(dir / "beliefs.jsonl", beliefs.str());
  return 0;
}

int cmd_run_scope(const ExperimentConfig& cfg, const std::string& raw) {
  validate_run_config(cfg);
  ScopeParams params = cfg.scope;
  params.mask = parse_loss_mask(cfg.loss_mask);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  write_text_file(dir / "config.txt", raw);

  const ObjectModel poker = resolve_model(cfg.poker_model, cfg);
  const ObjectModel tool = resolve_model(cfg.tool_model, cfg);
  run_scope_batch(cfg, poker, tool, params, dir, true, "scope");
  return 0;
}

const char* kStatHeader =
    "mean_trans_poker_cm,stdev_trans_poker_cm,mean_rot_poker_deg,"
    "stdev_rot_poker_deg,mean_trans_tool_cm,stdev_trans_tool_cm,"
    "mean_rot_tool_deg,stdev_rot_tool_deg,mean_e_agg_cm,stdev_e_agg_cm";

std::string stat_row(const TrialStats& stats) {
  std::ostringstream out;
  const char* cols[] = {"trans_poker_cm", "rot_poker_deg", "trans_tool_cm",
                        "rot_tool_deg", "e_agg_cm"};
  bool first = true;
  for (const char* c : cols) {
    out << (first ? "" : ",") << g17(stats.mean_of(c)) << ','
        << g17(stats.stdev_of(c));
    first = false;
  }
  return out.str();
}

int cmd_ablation(const ExperimentConfig& cfg, const std::string& raw) {
  validate_run_config(cfg);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  write_text_file(dir / "config.txt", raw);

  const ObjectModel poker = resolve_model(cfg.poker_model, cfg);
  const ObjectModel tool = resolve_model(cfg.tool_model, cfg);

  const char* subsets[] = {"P", "C", "F", "PC", "PF", "CF", "PCF"};
  std::ostringstream csv;
  csv << "# ablation over loss subsets; units: cm, deg; mean/stdev over "
      << cfg.trials << " trials\n"
      << "subset,n_trials," << kStatHeader << "\n";
  for (const char* subset : subsets) {
    ScopeParams params = cfg.scope;
    params.mask = parse_loss_mask(subset);
    const TrialStats stats =
        run_scope_batch(cfg, poker, tool, params, dir / ("subset_" + std::string(subset)),
                        false, std::string("ablation ") + subset);
    csv << subset << ',' << cfg.trials << ',' << stat_row(stats) << "\n";
  }
  write_text_file(dir / "ablation.csv", csv.str());
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& raw) {
  const std::vector<int> grid_clp =
      parse_int_list("sweep_n_clp", cfg.sweep_n_clp);
  const std::vector<int> grid_opp =
      parse_int_list("sweep_n_opp", cfg.sweep_n_opp);
  if (grid_clp.empty() || grid_opp.empty())
    throw ConfigError("sweep: empty grid (sweep_n_clp / sweep_n_opp)");
  validate_run_config(cfg);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  write_text_file(dir / "config.txt", raw);

  const ObjectModel poker = resolve_model(cfg.poker_model, cfg);
  const ObjectModel tool = resolve_model(cfg.tool_model, cfg);

  std::ostringstream csv;
  csv << "# sweep over contact particles (n_clp) and pose particles (n_opp); "
         "units: cm, deg; mean/stdev over "
      << cfg.trials << " trials\n"
      << "n_clp,n_opp,n_trials," << kStatHeader << "\n";
  for (int n_clp : grid_clp) {
    for (int n_opp : grid_opp) {
      ScopeParams params = cfg.scope;
      params.cpf.n_clp = n_clp;
      params.n_opp = n_opp;
      params.mask = parse_loss_mask(cfg.loss_mask);
      try {
        params.check();
      } catch (const InputError& e) {
        throw ConfigError(e.what());
      }
      std::ostringstream tag;
      tag << "sweep n_clp=" << n_clp << " n_opp=" << n_opp;
      std::ostringstream sub;
      sub << "clp" << n_clp << "_opp" << n_opp;
      const TrialStats stats = run_scope_batch(
          cfg, poker, tool, params, dir / sub.str(), false, tag.str());
      csv << n_clp << ',' << n_opp << ',' << cfg.trials << ','
          << stat_row(stats) << "\n";
    }
  }
  write_text_file(dir / "sweep.csv", csv.str());
  return 0;
}

// Resolved configuration written when no --config file was given, so every
// run stays reproducible from its output directory alone.
std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "poker_model = " << cfg.poker_model << "\n"
      << "tool_model = " << cfg.tool_model << "\n"
      << "voxel_size = " << g17(cfg.voxel_size) << "\n"
      << "gripper_tolerance = " << g17(cfg.gripper_tolerance) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "trials = " << cfg.trials << "\n"
      << "jobs = " << cfg.jobs << "\n"
      << "loss_mask = " << cfg.loss_mask << "\n"
      << "n_opp = " << cfg.scope.n_opp << "\n"
      << "n_os = " << cfg.scope.n_os << "\n"
      << "noise_redraws = " << cfg.scope.noise_redraws << "\n"
      << "pose_sigma_x = " << g17(cfg.scope.pose_sigma.x()) << "\n"
      << "pose_sigma_z = " << g17(cfg.scope.pose_sigma.y()) << "\n"
      << "pose_sigma_theta_deg = " << g17(deg(cfg.scope.pose_sigma.z())) << "\n"
      << "cap_t_max = " << g17(cfg.scope.caps.t_max) << "\n"
      << "cap_r_max_deg = " << g17(deg(cfg.scope.caps.r_max)) << "\n"
      << "n_clp = " << cfg.scope.cpf.n_clp << "\n"
      << "n_cs = " << cfg.scope.cpf.n_cs << "\n"
      << "n_f = " << cfg.scope.cpf.n_f << "\n"
      << "mu = " << g17(cfg.scope.cpf.mu) << "\n"
      << "motion_sigma = " << g17(cfg.scope.cpf.motion_sigma) << "\n"
      << "motion_anneal = " << g17(cfg.scope.cpf.motion_anneal) << "\n"
      << "resample_threshold = " << g17(cfg.scope.cpf.resample_threshold) << "\n"
      << "eta_p = " << g17(cfg.scope.weights.eta_p) << "\n"
      << "eta_c = " << g17(cfg.scope.weights.eta_c) << "\n"
      << "eps_pp = " << g17(cfg.scope.weights.eps_pp) << "\n"
      << "lambda = " << g17(cfg.scope.weights.lambda) << "\n"
      << "noise_sigma_f = " << g17(cfg.noise_sigma_f) << "\n"
      << "noise_sigma_m = " << g17(cfg.noise_sigma_m) << "\n"
      << "scenario_force_min = " << g17(cfg.scenario_force_min) << "\n"
      << "scenario_force_max = " << g17(cfg.scenario_force_max) << "\n"
      << "scenario_aim_z = " << g17(cfg.scenario_aim_z) << "\n"
      << "scenario_tilt_max_deg = " << g17(cfg.scenario_tilt_max_deg) << "\n"
      << "scenario_add_noise = " << (cfg.scenario_add_noise ? "true" : "false")
      << "\n"
      << "sweep_n_clp = " << cfg.sweep_n_clp << "\n"
      << "sweep_n_opp = " << cfg.sweep_n_opp << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-hand pose-pair and contact estimation from wrench "
               "measurements"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override, mask_override;
  int seed_override = 0, trials_override = 0, jobs_override = 0;
  std::vector<CLI::Option*> seed_opts, trials_opts, jobs_opts, out_opts,
      mask_opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "experiment file with 'key = value' lines");
    seed_opts.push_back(
        sub->add_option("--seed", seed_override, "base RNG seed"));
    trials_opts.push_back(
        sub->add_option("--trials", trials_override, "number of trials"));
    out_opts.push_back(
        sub->add_option("--out", out_override, "output directory"));
    jobs_opts.push_back(
        sub->add_option("--jobs", jobs_override, "worker threads for trials"));
    mask_opts.push_back(sub->add_option("--loss-mask", mask_override,
                                        "loss subset, e.g. PCF, C, PF"));
  };
  const auto given = [](const std::vector<CLI::Option*>& opts) {
    for (const CLI::Option* o : opts)
      if (o->count() > 0) return true;
    return false;
  };

  CLI::App* pre = app.add_subcommand(
      "preprocess", "voxelize a mesh into an SDF + surface model bundle");
  CLI::App* cal = app.add_subcommand(
      "calibrate", "estimate sensor noise from a steady wrench log");
  CLI::App* cpf = app.add_subcommand(
      "run-cpfgrasp", "contact localisation trials at true poses");
  CLI::App* scp = app.add_subcommand(
      "run-scope", "joint pose-pair + contact estimation trials");
  CLI::App* abl = app.add_subcommand(
      "ablation", "run-scope across all 7 loss subsets");
  CLI::App* swp = app.add_subcommand(
      "sweep", "run-scope across an n_clp x n_opp grid");
  for (CLI::App* sub : {pre, cal, cpf, scp, abl, swp}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg;
    std::string raw;
    if (!config_path.empty()) raw = load_config_file(config_path, cfg);
    if (given(seed_opts)) cfg.seed = static_cast<unsigned>(seed_override);
    if (given(trials_opts)) cfg.trials = trials_override;
    if (given(jobs_opts)) cfg.jobs = jobs_override;
    if (given(out_opts)) cfg.out = out_override;
    if (given(mask_opts)) cfg.loss_mask = mask_override;
    if (raw.empty()) raw = render_config(cfg);

    if (pre->parsed()) return cmd_preprocess(cfg);
    if (cal->parsed()) return cmd_calibrate(cfg);
    if (cpf->parsed()) return cmd_run_cpfgrasp(cfg, raw);
    if (scp->parsed()) return cmd_run_scope(cfg, raw);
    if (abl->parsed()) return cmd_ablation(cfg, raw);
    if (swp->parsed()) return cmd_sweep(cfg, raw);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
