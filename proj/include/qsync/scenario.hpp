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

// Run configuration, named presets, single runs and detuning sweeps.

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qsync/correlations.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/errors.hpp"
#include "qsync/models.hpp"
#include "qsync/sync.hpp"
#include "qsync/units.hpp"

namespace qsync {

using Json = nlohmann::ordered_json;

enum class ModelKind { kDimer, kMilitello };

struct TrajectorySettings {
  double t_end = 10.0;
  double dt_out = 0.002;
  double rtol = 1e-8;
  double atol = 1e-10;
};

struct CorrelationSettings {
  double interval = 0.1;  // time between evaluated states
  bool measure_second = false;
  std::size_t reduced_rank = 0;
  double reduced_weight = 1e-6;
  double long_time_fraction = 0.3;
  std::size_t long_time_points = 6;
};

struct RunConfig {
  std::string preset;
  ModelKind model = ModelKind::kDimer;
  DimerParams dimer;
  DetuningHold hold = DetuningHold::kHuangRhys;
  MilitelloParams militello;
  double alpha = 1.0;  // coherent amplitude of the second mode (Militello)
  std::vector<double> detunings{1.002};
  TrajectorySettings trajectory;
  PlateauOptions plateau;
  double gap_floor = 1e-9;
  MeasurementSampler sampler;
  CorrelationSettings correlations;
  std::string output_dir = "out";

  void validate() const {
    if (detunings.empty()) throw ConfigError("detunings: list is empty");
    for (double d : detunings) {
      if (!(d >= 1.0)) throw ConfigError("detunings: every entry must be >= 1.0");
    }
    const auto& t = trajectory;
    if (!(t.t_end > 0.0) || !(t.dt_out > 0.0) || t.dt_out > t.t_end) {
      throw ConfigError("trajectory: need 0 < dt_out <= t_end");
    }
    if (!(t.rtol > 0.0) || !(t.atol > 0.0)) throw ConfigError("trajectory: tolerances must be positive");
    if (!(plateau.tail_fraction > 0.0 && plateau.tail_fraction <= 1.0)) throw ConfigError("sync.tail_fraction: must be in (0, 1]");
    if (!(plateau.std_tol > 0.0) || !(plateau.slope_tol > 0.0)) throw ConfigError("sync: thresholds must be positive");
    if (!(correlations.interval > 0.0)) throw ConfigError("correlations.interval: must be positive");
    if (!(correlations.long_time_fraction > 0.0 && correlations.long_time_fraction <= 1.0)) {
      throw ConfigError("correlations.long_time_fraction: must be in (0, 1]");
    }
    if (correlations.long_time_points < 1) throw ConfigError("correlations.long_time_points: must be >= 1");
    try {
      sampler.validate();
      if (model == ModelKind::kDimer) {
        dimer.validate();
      } else {
        militello.validate();
        (void)coherent_state(alpha, militello.levels);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
};

inline std::vector<std::string> preset_names() { return {"pe545", "pe545-eta05", "militello-phi", "militello-detuned"}; }

/// Named parameter sets. The Militello presets work in units of the
/// two-level gap, so times are dimensionless.
inline RunConfig preset(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  if (name == "pe545") return c;
  if (name == "pe545-eta05") {
    c.dimer = DimerParams::pe545_eta05();
    return c;
  }
  if (name == "militello-phi" || name == "militello-detuned") {
    c.model = ModelKind::kMilitello;
    c.militello = MilitelloParams::defaults();
    c.trajectory.t_end = 300.0;
    c.trajectory.dt_out = 0.05;
    c.correlations.interval = 2.0;
    if (name == "militello-phi") {
      c.detunings = {1.0};
    } else {
      c.militello.phi1 = std::numbers::pi;
      c.detunings = {1.2, 1.35};
    }
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const RunConfig& c) {
  Json j;
  j["preset"] = c.preset;
  j["model"] = c.model == ModelKind::kDimer ? "dimer" : "militello";
  const auto& d = c.dimer;
  j["dimer"] = {{"e1", d.e1},         {"e2", d.e2},       {"V", d.V},
                {"omega1", d.omega1}, {"omega2", d.omega2}, {"S1", d.S1},
                {"S2", d.S2},         {"gamma_deph", d.gamma_deph}, {"gamma_th", d.gamma_th},
                {"kBT", d.kBT},       {"levels", d.levels},
                {"detuning_hold", c.hold == DetuningHold::kHuangRhys ? "huang_rhys" : "coupling"}};
  const auto& m = c.militello;
  j["militello"] = {{"e1", m.e1},     {"e2", m.e2},     {"omega1", m.omega1}, {"omega2", m.omega2},
                    {"g1", m.g1},     {"g2", m.g2},     {"phi1", m.phi1},     {"phi2", m.phi2},
                    {"gamma_minus", m.gamma_minus},     {"levels", m.levels}, {"alpha", c.alpha}};
  j["detunings"] = c.detunings;
  j["trajectory"] = {{"t_end", c.trajectory.t_end},
                     {"dt_out", c.trajectory.dt_out},
                     {"rtol", c.trajectory.rtol},
                     {"atol", c.trajectory.atol}};
  j["sync"] = {{"tail_fraction", c.plateau.tail_fraction}, {"slope_tol", c.plateau.slope_tol},
               {"std_tol", c.plateau.std_tol},             {"onset_band", c.plateau.onset_band},
               {"gap_floor", c.gap_floor}};
  j["sampler"] = {{"seed", c.sampler.seed},           {"batch_size", c.sampler.batch_size},
                  {"max_batches", c.sampler.max_batches}, {"rel_tol", c.sampler.rel_tol},
                  {"patience", c.sampler.patience},   {"refine_steps", c.sampler.refine_steps}};
  const auto& k = c.correlations;
  j["correlations"] = {{"interval", k.interval},
                       {"measure_second", k.measure_second},
                       {"reduced_rank", k.reduced_rank},
                       {"reduced_weight", k.reduced_weight},
                       {"long_time_fraction", k.long_time_fraction},
                       {"long_time_points", k.long_time_points}};
  j["output_dir"] = c.output_dir;
  return j;
}

namespace detail {

/// Reads the members of one JSON object, rejecting unknown keys.
class FieldReader {
 public:
  FieldReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(std::string_view key, T& out) {
    seen_.emplace_back(key);
    auto it = obj_.find(std::string(key));
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned()) throw ConfigError("expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("expected a number");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw ConfigError(field(key) + ": " + e.what());
    }
  }

  void mark(std::string_view key) { seen_.emplace_back(key); }

  bool has(std::string_view key) const { return obj_.contains(std::string(key)); }
  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) throw ConfigError(field(it.key()) + ": unknown field");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace detail

/// Applies a configuration document on top of its preset (or `base` when
/// the document names none). A run manifest is accepted too.
inline RunConfig config_from_json(const Json& doc, const RunConfig& base = preset("pe545")) {
  const Json& j = doc.contains("config") && doc.contains("manifest_version") ? doc.at("config") : doc;
  if (!j.is_object()) throw ConfigError("configuration: expected an object at top level");
  RunConfig c = base;
  detail::FieldReader top(j, "");
  std::string preset_name;
  top.read("preset", preset_name);
  if (!preset_name.empty()) c = preset(preset_name);
  std::string model;
  top.read("model", model);
  if (!model.empty()) {
    if (model == "dimer") {
      c.model = ModelKind::kDimer;
    } else if (model == "militello") {
      c.model = ModelKind::kMilitello;
    } else {
      throw ConfigError("model: expected 'dimer' or 'militello', got '" + model + "'");
    }
  }
  if (j.contains("dimer")) {
    detail::FieldReader r(j.at("dimer"), "dimer");
    auto& d = c.dimer;
    r.read("e1", d.e1);
    r.read("e2", d.e2);
    r.read("V", d.V);
    r.read("omega1", d.omega1);
    r.read("omega2", d.omega2);
    r.read("S1", d.S1);
    r.read("S2", d.S2);
    double g1 = -1.0, g2 = -1.0;
    r.read("g1", g1);
    r.read("g2", g2);
    if (r.has("g1") && r.has("S1")) throw ConfigError("dimer: give either g1 or S1, not both");
    if (r.has("g2") && r.has("S2")) throw ConfigError("dimer: give either g2 or S2, not both");
    if (r.has("g1")) d.S1 = huang_rhys_from_coupling(g1, d.omega1);
    if (r.has("g2")) d.S2 = huang_rhys_from_coupling(g2, d.omega2);
    r.read("gamma_deph", d.gamma_deph);
    r.read("gamma_th", d.gamma_th);
    r.read("kBT", d.kBT);
    r.read("levels", d.levels);
    std::string hold;
    r.read("detuning_hold", hold);
    if (hold == "huang_rhys") {
      c.hold = DetuningHold::kHuangRhys;
    } else if (hold == "coupling") {
      c.hold = DetuningHold::kCoupling;
    } else if (!hold.empty()) {
      throw ConfigError("dimer.detuning_hold: expected 'huang_rhys' or 'coupling'");
    }
    r.finish();
  }
  if (j.contains("militello")) {
    detail::FieldReader r(j.at("militello"), "militello");
    auto& m = c.militello;
    r.read("e1", m.e1);
    r.read("e2", m.e2);
    r.read("omega1", m.omega1);
    r.read("omega2", m.omega2);
    r.read("g1", m.g1);
    r.read("g2", m.g2);
    r.read("phi1", m.phi1);
    r.read("phi2", m.phi2);
    r.read("gamma_minus", m.gamma_minus);
    r.read("levels", m.levels);
    r.read("alpha", c.alpha);
    r.finish();
  }
  if (j.contains("detunings")) {
    const auto& d = j.at("detunings");
    if (!d.is_array()) throw ConfigError("detunings: expected an array of numbers");
    c.detunings.clear();
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (!d[k].is_number()) throw ConfigError("detunings[" + std::to_string(k) + "]: expected a number");
      c.detunings.push_back(d[k].get<double>());
    }
  }
  if (j.contains("trajectory")) {
    detail::FieldReader r(j.at("trajectory"), "trajectory");
    r.read("t_end", c.trajectory.t_end);
    r.read("dt_out", c.trajectory.dt_out);
    r.read("rtol", c.trajectory.rtol);
    r.read("atol", c.trajectory.atol);
    r.finish();
  }
  if (j.contains("sync")) {
    detail::FieldReader r(j.at("sync"), "sync");
    r.read("tail_fraction", c.plateau.tail_fraction);
    r.read("slope_tol", c.plateau.slope_tol);
    r.read("std_tol", c.plateau.std_tol);
    r.read("onset_band", c.plateau.onset_band);
    r.read("gap_floor", c.gap_floor);
    r.finish();
  }
  if (j.contains("sampler")) {
    detail::FieldReader r(j.at("sampler"), "sampler");
    r.read("seed", c.sampler.seed);
    r.read("batch_size", c.sampler.batch_size);
    r.read("max_batches", c.sampler.max_batches);
    r.read("rel_tol", c.sampler.rel_tol);
    r.read("patience", c.sampler.patience);
    r.read("refine_steps", c.sampler.refine_steps);
    r.finish();
  }
  if (j.contains("correlations")) {
    detail::FieldReader r(j.at("correlations"), "correlations");
    auto& k = c.correlations;
    r.read("interval", k.interval);
    r.read("measure_second", k.measure_second);
    r.read("reduced_rank", k.reduced_rank);
    r.read("reduced_weight", k.reduced_weight);
    r.read("long_time_fraction", k.long_time_fraction);
    r.read("long_time_points", k.long_time_points);
    r.finish();
  }
  for (const char* key : {"dimer", "militello", "detunings", "trajectory", "sync", "sampler", "correlations"}) top.mark(key);
  top.read("output_dir", c.output_dir);
  top.finish();
  return c;
}

/// Parses text; syntax errors carry line and column.
inline RunConfig config_from_text(std::string_view text, const RunConfig& base = preset("pe545")) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  return config_from_json(doc, base);
}

inline RunConfig config_from_file(const std::string& path, const RunConfig& base = preset("pe545")) {
  std::ifstream in(path);
  if (!in) throw ConfigError("configuration: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_text(ss.str(), base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Single runs

/// Everything needed to integrate one configuration at one detuning.
struct Scenario {
  OpenSystem system;
  DensityMatrix initial;
  std::vector<NamedObservable> observables;
  double omega1 = 0.0;
  double time_scale = 1.0;
  std::string time_label;
};

inline Scenario make_scenario(const RunConfig& c, double detuning) {
  try {
    if (c.model == ModelKind::kDimer) {
      const DimerModel model = dimer_hamiltonian(c.dimer.detuned(detuning, c.hold));
      return {dimer_system(model), dimer_initial_state(model), dimer_observables(model), model.params.omega1,
              units::kAngularPerWavenumber, "t_ps"};
    }
    const MilitelloParams p = c.militello.detuned(detuning);
    return {militello_system(p), militello_initial_state(p, c.alpha), militello_observables(p), p.omega1, 1.0, "t"};
  } catch (const TruncationError& e) {
    throw ConfigError(e.what());
  }
}

inline EvolveOptions evolve_options(const RunConfig& c, bool store_states) {
  EvolveOptions o;
  o.t_end = c.trajectory.t_end;
  o.dt_out = c.trajectory.dt_out;
  o.rtol = c.trajectory.rtol;
  o.atol = c.trajectory.atol;
  if (store_states) {
    o.store_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.correlations.interval / c.trajectory.dt_out)));
  }
  return o;
}

inline SyncOptions sync_options(const RunConfig& c) {
  SyncOptions s;
  s.pearson.abs_floor = c.gap_floor;
  return s;
}

struct SimulationResult {
  double detuning = 1.0;
  std::string time_label;
  Trajectory trajectory;
  SyncSeries sync;
  PlateauResult plateau;
};

inline SimulationResult simulate(const RunConfig& c, double detuning, bool store_states = false) {
  const Scenario s = make_scenario(c, detuning);
  SimulationResult r;
  r.detuning = detuning;
  r.time_label = s.time_label;
  r.trajectory = evolve(s.initial, s.system, evolve_options(c, store_states), s.observables);
  r.sync = sync_series(r.trajectory, "X1", "X2", s.omega1, s.time_scale, sync_options(c));
  r.plateau = plateau(r.sync, c.plateau);
  return r;
}

inline CorrelationOptions correlation_options(const RunConfig& c) {
  CorrelationOptions o;
  o.sampler = c.sampler;
  o.measure_second = c.correlations.measure_second;
  o.reduced_rank = c.correlations.reduced_rank;
  o.reduced_weight = c.correlations.reduced_weight;
  return o;
}

/// Mean triple over `long_time_points` stored states spread evenly across
/// the trailing `long_time_fraction` of the trajectory.
inline CorrelationTriple long_time_correlations(const Trajectory& traj, const RunConfig& c) {
  if (traj.states.empty()) throw InvalidInput("long_time_correlations: trajectory has no stored states");
  const double t_from = (1.0 - c.correlations.long_time_fraction) * traj.times.back();
  std::vector<std::size_t> tail;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (traj.times[traj.states[k].index] >= t_from - 1e-12) tail.push_back(k);
  }
  if (tail.empty()) tail.push_back(traj.states.size() - 1);
  const std::size_t n = std::min(c.correlations.long_time_points, tail.size());
  Trajectory picked;
  picked.times = traj.times;
  for (std::size_t i = 0; i < n; ++i) {
    // Evenly spaced, always including the final state.
    const std::size_t pos = n == 1 ? tail.size() - 1 : (i * (tail.size() - 1)) / (n - 1);
    picked.states.push_back(traj.states[tail[pos]]);
  }
  const auto pts = correlation_dynamics(picked, correlation_options(c));
  CorrelationTriple mean;
  mean.converged = true;
  for (const auto& p : pts) {
    mean.mutual_information += p.triple.mutual_information / static_cast<double>(pts.size());
    mean.classical += p.triple.classical / static_cast<double>(pts.size());
    mean.discord += p.triple.discord / static_cast<double>(pts.size());
    mean.converged = mean.converged && p.triple.converged;
    mean.samples += p.triple.samples;
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Worker count from QSYNC_WORKERS, else the hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("QSYNC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw ConfigError("QSYNC_WORKERS: expected a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0..n-1) on up to `workers` threads; each index runs exactly once.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct SweepRow {
  double detuning = 1.0;
  bool ok = false;
  std::string error;
  PlateauResult plateau;
  std::optional<CorrelationTriple> long_time;
};

/// One independent run per detuning, in input order. A failing run is
/// recorded in its row and the sweep continues.
inline std::vector<SweepRow> detuning_sweep(const RunConfig& c, bool with_correlations, std::size_t workers = 1) {
  for (double d : c.detunings) {
    if (!(d >= 1.0)) throw ConfigError("detuning_sweep: detunings must be >= 1.0");
  }
  std::vector<SweepRow> rows(c.detunings.size());
  parallel_for(rows.size(), workers, [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.detuning = c.detunings[k];
    try {
      const auto r = simulate(c, row.detuning, with_correlations);
      row.plateau = r.plateau;
      if (with_correlations) row.long_time = long_time_correlations(r.trajectory, c);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "delta_omega,synchronised,C_stable,onset_ps,I_long,J_long,D_long\n" << std::setprecision(12);
  auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const auto& r : rows) {
    os << r.detuning << ',' << (r.ok ? (r.plateau.synchronised ? "1" : "0") : "") << ',';
    opt(r.plateau.stable_value);
    os << ',';
    opt(r.plateau.onset);
    os << ',';
    if (r.long_time) os << r.long_time->mutual_information << ',' << r.long_time->classical << ',' << r.long_time->discord;
    else os << ",,";
    os << '\n';
  }
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept, with the Pearson r of
/// the points.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("fit_line: length mismatch");
  if (x.size() < 2) throw InvalidInput("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k] / n;
    my += y[k] / n;
  }
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  f.points = x.size();
  return f;
}

/// Long-time discord normalised by the zero-detuning row, regressed on C*.
struct DiscordRegression {
  std::optional<LinearFit> fit;
  std::vector<double> stable_values;
  std::vector<double> normalized_discord;
  std::string warning;
};

inline DiscordRegression discord_regression(std::span<const SweepRow> rows) {
  DiscordRegression out;
  const SweepRow* ref = nullptr;
  for (const auto& r : rows) {
    if (r.ok && r.long_time && std::abs(r.detuning - 1.0) < 1e-12) ref = &r;
  }
  if (!ref) {
    out.warning = "no zero-detuning row with correlations; regression omitted";
    return out;
  }
  if (!(ref->long_time->discord > 0.0)) {
    out.warning = "zero-detuning discord is zero; regression omitted";
    return out;
  }
  for (const auto& r : rows) {
    if (!r.ok || !r.plateau.synchronised || !r.long_time) continue;
    out.stable_values.push_back(*r.plateau.stable_value);
    out.normalized_discord.push_back(r.long_time->discord / ref->long_time->discord);
  }
  if (out.stable_values.size() < 3) {
    out.warning = "fewer than 3 synchronised rows with correlations; regression omitted";
    return out;
  }
  try {
    out.fit = fit_line(out.stable_values, out.normalized_discord);
  } catch (const InvalidInput& e) {
    out.warning = std::string("regression omitted: ") + e.what();
  }
  return out;
}

inline Json to_json(const PlateauResult& p) {
  Json j;
  j["synchronised"] = p.synchronised;
  j["C_stable"] = p.stable_value ? Json(*p.stable_value) : Json(nullptr);
  j["onset"] = p.onset ? Json(*p.onset) : Json(nullptr);
  j["tail_mean"] = p.tail_mean;
  j["tail_std"] = p.tail_std;
  j["tail_slope"] = p.tail_slope;
  j["tail_range"] = p.tail_range;
  j["tail_points"] = p.tail_points;
  return j;
}

inline Json to_json(const DiscordRegression& r) {
  Json j;
  if (r.fit) {
    j["slope"] = r.fit->slope;
    j["intercept"] = r.fit->intercept;
    j["pearson_r"] = r.fit->pearson_r;
    j["points"] = r.fit->points;
  } else {
    j["warning"] = r.warning;
  }
  j["C_stable"] = r.stable_values;
  j["D_normalized"] = r.normalized_discord;
  return j;
}

}  // namespace qsync
