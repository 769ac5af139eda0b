// Copyright 2026 The qsync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Windowed Pearson synchronisation measure and plateau classification.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsync/dynamics.hpp"
#include "qsync/errors.hpp"

namespace qsync {

/// Real samples on the uniform grid t0, t0 + dt, ...
struct SampledSignal {
  std::span<const double> values;
  double dt = 0.0;
  double t0 = 0.0;

  double t_last() const { return t0 + dt * static_cast<double>(values.size() - 1); }

  /// Linear interpolation, clamped to the sampled range.
  double at(double t) const {
    const double x = (t - t0) / dt;
    if (x <= 0.0) return values.front();
    const auto last = values.size() - 1;
    if (x >= static_cast<double>(last)) return values.back();
    const auto k = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(k);
    return values[k] + frac * (values[k + 1] - values[k]);
  }
};

struct PearsonOptions {
  std::size_t min_samples = 8;
  /// Windows whose RMS deviation from the window mean falls below
  /// `abs_floor + rel_floor * max|f|` count as degenerate.
  double abs_floor = 0.0;
  double rel_floor = 1e-12;
};

/// Pearson correlation of f1 and f2 over [t, t + window]: trapezoid rule on
/// the sampling grid, with linearly interpolated nodes at the window edges.
inline double pearson_window(const SampledSignal& f1, const SampledSignal& f2, double t, double window,
                             const PearsonOptions& opt = {}) {
  if (f1.values.size() != f2.values.size() || f1.dt != f2.dt || f1.t0 != f2.t0) {
    throw InvalidInput("pearson_window: signals must share a sampling grid");
  }
  if (f1.values.size() < 2 || !(f1.dt > 0.0)) throw InvalidInput("pearson_window: need at least two samples");
  if (!(window > 0.0)) throw InvalidInput("pearson_window: window must be positive");
  const double dt = f1.dt;
  const double eps = 1e-9 * dt;
  const double end = t + window;
  if (t < f1.t0 - eps || end > f1.t_last() + eps) {
    throw InvalidInput("pearson_window: window [" + std::to_string(t) + ", " + std::to_string(end) +
                       "] lies outside the sampled range");
  }
  if (window / dt + 1e-9 < static_cast<double>(opt.min_samples)) {
    throw InvalidInput("pearson_window: fewer than " + std::to_string(opt.min_samples) + " samples per window");
  }

  // Quadrature nodes: both edges plus every grid point strictly inside.
  thread_local std::vector<double> nodes, v1, v2;
  nodes.clear();
  v1.clear();
  v2.clear();
  auto push = [&](double tn, double a, double b) {
    nodes.push_back(tn);
    v1.push_back(a);
    v2.push_back(b);
  };
  push(t, f1.at(t), f2.at(t));
  const double first = std::ceil((t - f1.t0) / dt - 1e-9);
  for (auto k = static_cast<std::ptrdiff_t>(std::max(first, 0.0));; ++k) {
    const double tk = f1.t0 + dt * static_cast<double>(k);
    if (tk >= end - eps) break;
    if (tk <= t + eps) continue;
    push(tk, f1.values[static_cast<std::size_t>(k)], f2.values[static_cast<std::size_t>(k)]);
  }
  push(end, f1.at(end), f2.at(end));

  auto integrate = [&](auto&& g) {
    double acc = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) acc += 0.5 * (nodes[k] - nodes[k - 1]) * (g(k) + g(k - 1));
    return acc;
  };
  const double mean1 = integrate([&](std::size_t k) { return v1[k]; }) / window;
  const double mean2 = integrate([&](std::size_t k) { return v2[k]; }) / window;
  const double s11 = integrate([&](std::size_t k) { return (v1[k] - mean1) * (v1[k] - mean1); });
  const double s22 = integrate([&](std::size_t k) { return (v2[k] - mean2) * (v2[k] - mean2); });
  const double s12 = integrate([&](std::size_t k) { return (v1[k] - mean1) * (v2[k] - mean2); });

  auto degenerate = [&](const std::vector<double>& v, double s) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    return std::sqrt(s / window) <= opt.abs_floor + opt.rel_floor * peak;
  };
  if (degenerate(v1, s11) || degenerate(v2, s22)) throw DegenerateSignal("pearson_window: constant signal in window");
  return std::clamp(s12 / std::sqrt(s11 * s22), -1.0, 1.0);
}

/// Period 2 pi / omega in trajectory time units.
inline double mode_period(double omega, double time_scale) { return 2.0 * std::numbers::pi / (omega * time_scale); }

/// C(t) on the output grid; gaps (degenerate windows) are NaN.
struct SyncSeries {
  std::vector<double> times;
  std::vector<double> values;
  double window = 0.0;

  static bool is_gap(double v) { return std::isnan(v); }
};

struct SyncOptions {
  PearsonOptions pearson{8, 1e-9, 1e-12};
};

inline SyncSeries sync_series(std::span<const double> times, std::span<const double> x1, std::span<const double> x2,
                              double window, const SyncOptions& opt = {}) {
  if (times.size() != x1.size() || times.size() != x2.size()) throw InvalidInput("sync_series: length mismatch");
  if (times.size() < 2) throw InvalidInput("sync_series: need at least two samples");
  const double dt = times[1] - times[0];
  const SampledSignal f1{x1, dt, times.front()};
  const SampledSignal f2{x2, dt, times.front()};
  if (window > f1.t_last() - f1.t0 + 1e-9 * dt) throw InvalidInput("sync_series: trajectory shorter than one window");
  SyncSeries out;
  out.window = window;
  for (double t : times) {
    if (t + window > f1.t_last() + 1e-9 * dt) break;
    out.times.push_back(t);
    try {
      out.values.push_back(pearson_window(f1, f2, t, window, opt.pearson));
    } catch (const DegenerateSignal&) {
      out.values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

/// Synchronisation series of two observables, window = one period of the
/// mode with energy `omega1`.
inline SyncSeries sync_series(const Trajectory& traj, std::string_view obs1, std::string_view obs2, double omega1,
                              double time_scale, const SyncOptions& opt = {}) {
  return sync_series(traj.times, traj.observable(obs1), traj.observable(obs2), mode_period(omega1, time_scale), opt);
}

inline void write_sync_csv(std::ostream& os, const SyncSeries& s, std::string_view time_label = "t_ps") {
  os << time_label << ",C\n" << std::setprecision(12);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    os << s.times[k] << ',';
    if (SyncSeries::is_gap(s.values[k])) {
      os << "nan";
    } else {
      os << s.values[k];
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

/// Thresholds for calling the tail of a series flat. A series is
/// synchronised when, over its trailing `tail_fraction`, both the standard
/// deviation and the magnitude of the least-squares slope are below
/// tolerance. The onset is the earliest time after which every value stays
/// within `onset_band` of the stable value.
struct PlateauOptions {
  double tail_fraction = 0.3;
  double slope_tol = 0.01;  // per time unit
  double std_tol = 0.01;
  double onset_band = 0.05;
  std::size_t min_tail_points = 3;
};

struct PlateauResult {
  bool synchronised = false;
  std::optional<double> stable_value;
  std::optional<double> onset;
  double tail_std = 0.0;
  double tail_slope = 0.0;
  double tail_range = 0.0;
  double tail_mean = 0.0;
  std::size_t tail_points = 0;
};

inline PlateauResult plateau(const SyncSeries& series, const PlateauOptions& opt = {}) {
  const std::size_t n = series.values.size();
  if (n == 0) throw InvalidInput("plateau: empty series");
  if (!(opt.tail_fraction > 0.0 && opt.tail_fraction <= 1.0)) throw InvalidInput("plateau: tail_fraction in (0, 1]");
  const auto tail_n = static_cast<std::size_t>(std::ceil(opt.tail_fraction * static_cast<double>(n)));
  if (tail_n < opt.min_tail_points) throw InvalidInput("plateau: series shorter than the tail window");

  std::vector<double> ts, cs;
  for (std::size_t k = n - tail_n; k < n; ++k) {
    if (SyncSeries::is_gap(series.values[k])) continue;
    ts.push_back(series.times[k]);
    cs.push_back(series.values[k]);
  }
  PlateauResult r;
  r.tail_points = cs.size();
  if (cs.size() < opt.min_tail_points) return r;  // decayed to noise: cannot call it synchronised

  const double m = static_cast<double>(cs.size());
  double tm = 0.0, cm = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    tm += ts[k];
    cm += cs[k];
  }
  tm /= m;
  cm /= m;
  double stt = 0.0, stc = 0.0, scc = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    stt += (ts[k] - tm) * (ts[k] - tm);
    stc += (ts[k] - tm) * (cs[k] - cm);
    scc += (cs[k] - cm) * (cs[k] - cm);
  }
  r.tail_mean = cm;
  r.tail_std = std::sqrt(scc / m);
  r.tail_slope = stt > 0.0 ? stc / stt : 0.0;
  const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
  r.tail_range = *hi - *lo;
  r.synchronised = r.tail_std < opt.std_tol && std::abs(r.tail_slope) < opt.slope_tol;
  if (!r.synchronised) return r;

  r.stable_value = cm;
  std::size_t onset = n;
  for (std::size_t k = n; k-- > 0;) {
    const double v = series.values[k];
    if (SyncSeries::is_gap(v)) continue;
    if (std::abs(v - cm) > opt.onset_band) break;
    onset = k;
  }
  if (onset < n) r.onset = series.times[onset];
  return r;
}

}  // namespace qsync
