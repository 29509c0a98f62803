#pragma once

// Wrench log ingestion and sensor-noise calibration. Logs are CSV with a
// declaration line first:
//
//   # units: N, N·m, s; frame: ft_sensor
//   0.000,0.01,-0.02,9.81,0.001,0.000,-0.002
//   ...
//
// Rows are t,fx,fy,fz,mx,my,mz. Declared units are honoured on load (mN,
// mN·m, ms scale by 1e-3); timestamps must be strictly increasing. The
// calibration takes a steady-state window, removes the per-component mean
// and returns floored unbiased variances.

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scope/common.hpp"
#include "scope/sensor_noise.hpp"

namespace scope {

struct WrenchLog {
  std::vector<double> timestamps;  // seconds
  std::vector<Vec6> samples;       // N, N·m
  std::string frame;

  std::size_t size() const { return samples.size(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline double parse_number(const std::string& field, int line) {
  const std::string t = trim(field);
  if (t.empty()) throw ParseError("empty numeric field", line);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + t + "'", line);
  }
  if (used != t.size())
    throw ParseError("trailing characters in number: '" + t + "'", line);
  return value;
}

inline double unit_scale(const std::string& unit, int line) {
  if (unit == "N" || unit == "N·m" || unit == "N*m" || unit == "Nm" ||
      unit == "s")
    return 1.0;
  if (unit == "mN" || unit == "mN·m" || unit == "mN*m" || unit == "mNm" ||
      unit == "ms")
    return 1e-3;
  throw ParseError("unsupported unit '" + unit + "'", line);
}

}  // namespace detail

inline WrenchLog load_wrench_log(const std::string& path,
                                 const std::string& expected_frame = "") {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open wrench log: " + path);

  WrenchLog log;
  double force_scale = 1.0, moment_scale = 1.0, time_scale = 1.0;
  bool have_header = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = detail::trim(t.substr(1));
      if (body.rfind("units:", 0) == 0) {
        // "# units: N, N·m, s; frame: <id>"
        const auto parts = detail::split(body.substr(6), ';');
        const auto units = detail::split(parts[0], ',');
        if (units.size() != 3)
          throw ParseError("units declaration needs force, moment, time",
                           line_no);
        force_scale = detail::unit_scale(detail::trim(units[0]), line_no);
        moment_scale = detail::unit_scale(detail::trim(units[1]), line_no);
        time_scale = detail::unit_scale(detail::trim(units[2]), line_no);
        for (std::size_t k = 1; k < parts.size(); ++k) {
          const std::string opt = detail::trim(parts[k]);
          if (opt.rfind("frame:", 0) == 0)
            log.frame = detail::trim(opt.substr(6));
        }
        have_header = true;
      }
      continue;  // other comment lines are ignored
    }

    if (!have_header)
      throw ParseError("missing '# units: ...' declaration before data",
                       line_no);
    const auto fields = detail::split(t, ',');
    if (fields.size() != 7)
      throw ParseError("expected 7 fields (t,fx,fy,fz,mx,my,mz), got " +
                           std::to_string(fields.size()),
                       line_no);
    const double stamp = detail::parse_number(fields[0], line_no) * time_scale;
    Vec6 sample;
    for (int k = 0; k < 3; ++k)
      sample[k] = detail::parse_number(fields[static_cast<std::size_t>(k) + 1], line_no) * force_scale;
    for (int k = 3; k < 6; ++k)
      sample[k] = detail::parse_number(fields[static_cast<std::size_t>(k) + 1], line_no) * moment_scale;
    if (!std::isfinite(stamp) || !sample.allFinite())
      throw ParseError("non-finite sample", line_no);
    if (!log.timestamps.empty() && stamp <= log.timestamps.back())
      throw ParseError("timestamps must be strictly increasing", line_no);
    log.timestamps.push_back(stamp);
    log.samples.push_back(sample);
  }

  if (log.samples.empty())
    throw InputError("wrench log has no samples: " + path);
  if (!expected_frame.empty() && log.frame != expected_frame)
    throw FrameError("wrench log frame '" + log.frame + "', expected '" +
                     expected_frame + "'");
  return log;
}

// Per-component noise from a steady-state stretch of the log: mean removed,
// unbiased sample variance, floored by the SensorNoise policy.
inline SensorNoise calibrate_sigma(const WrenchLog& log, double t_begin,
                                   double t_end,
                                   std::size_t min_samples = 30) {
  if (!(t_end > t_begin))
    throw InputError("calibrate_sigma: empty time window");

  Vec6 sum = Vec6::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log.timestamps[i] < t_begin || log.timestamps[i] > t_end) continue;
    if (!log.samples[i].allFinite())
      throw InputError("calibrate_sigma: non-finite sample in window");
    sum += log.samples[i];
    ++n;
  }
  if (n < min_samples)
    throw InputError("calibrate_sigma: window holds " + std::to_string(n) +
                     " samples, need >= " + std::to_string(min_samples));

  const Vec6 mean = sum / static_cast<double>(n);
  Vec6 ss = Vec6::Zero();
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log.timestamps[i] < t_begin || log.timestamps[i] > t_end) continue;
    const Vec6 d = log.samples[i] - mean;
    ss += d.cwiseProduct(d);
  }
  return SensorNoise(Vec6(ss / static_cast<double>(n - 1)));
}

// Suggests the quietest stretch of the log: the duration-long window with
// the smallest summed per-component variance. Returns (t_begin, t_end).
inline std::pair<double, double> suggest_steady_window(
    const WrenchLog& log, double duration = 2.0,
    std::size_t min_samples = 30) {
  if (!(duration > 0.0))
    throw InputError("suggest_steady_window: duration must be positive");
  const std::size_t n = log.size();
  std::vector<Vec6> pre(n + 1, Vec6::Zero()), pre2(n + 1, Vec6::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    pre[i + 1] = pre[i] + log.samples[i];
    pre2[i + 1] = pre2[i] + log.samples[i].cwiseProduct(log.samples[i]);
  }

  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> window{0.0, 0.0};
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < i) j = i;
    while (j + 1 < n && log.timestamps[j + 1] <= log.timestamps[i] + duration)
      ++j;
    const std::size_t m = j - i + 1;
    if (m < min_samples) continue;
    const Vec6 s = pre[j + 1] - pre[i];
    const Vec6 s2 = pre2[j + 1] - pre2[i];
    const double dm = static_cast<double>(m);
    const double total_var =
        ((s2 - s.cwiseProduct(s) / dm) / (dm - 1.0)).sum();
    if (total_var < best) {
      best = total_var;
      window = {log.timestamps[i], log.timestamps[i] + duration};
    }
  }
  if (!std::isfinite(best))
    throw InputError("suggest_steady_window: no window with enough samples");
  return window;
}

}  // namespace scope
