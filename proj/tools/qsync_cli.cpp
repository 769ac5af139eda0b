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

// qsync: scenario runner.
//
//   qsync simulate     --preset pe545 --detuning 1.002
//   qsync sweep        --preset pe545 --detuning 1.0 1.002 1.004 --with-correlations
//   qsync correlations --preset pe545 --detuning 1.002
//   qsync validate
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
// 4 validation failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "qsync/qsync.hpp"

#ifndef QSYNC_GIT_REVISION
#define QSYNC_GIT_REVISION "unknown"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct Overrides {
  std::string preset = "pe545";
  std::string config_path;
  std::vector<double> detunings;
  std::optional<double> phi1;
  std::optional<double> t_end;
  std::optional<double> dt_out;
  std::optional<std::size_t> levels;
  std::optional<std::uint64_t> seed;
  std::optional<double> interval;
  std::string out;
  std::optional<std::size_t> workers;
  bool dump_preset = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--preset", o.preset, "Named parameter set")
      ->check(CLI::IsMember(qsync::preset_names()));
  cmd->add_option("--config", o.config_path, "JSON configuration or run manifest")->check(CLI::ExistingFile);
  cmd->add_option("--detuning", o.detunings, "Detuning ratios omega2/omega1 (replaces the configured list)");
  cmd->add_option("--phi1", o.phi1, "Phase of the first mode's coupling (Militello model)");
  cmd->add_option("--t-end", o.t_end, "Trajectory length");
  cmd->add_option("--dt-out", o.dt_out, "Output grid spacing");
  cmd->add_option("--levels", o.levels, "Fock levels per mode");
  cmd->add_option("--seed", o.seed, "Measurement-search seed");
  cmd->add_option("--interval", o.interval, "Time between stored states for correlations");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Concurrent runs (default: QSYNC_WORKERS or hardware threads)");
  cmd->add_flag("--dump-preset", o.dump_preset, "Print the resolved configuration and exit");
}

// The document's preset, if any, must agree with an explicit --preset.
qsync::RunConfig resolve(const Overrides& o, bool preset_given) {
  qsync::RunConfig c = qsync::preset(o.preset);
  if (!o.config_path.empty()) {
    c = qsync::config_from_file(o.config_path, c);
    if (preset_given && !c.preset.empty() && c.preset != o.preset) {
      throw qsync::ConfigError("--preset " + o.preset + " conflicts with preset '" + c.preset + "' in " + o.config_path);
    }
  }
  if (!o.detunings.empty()) c.detunings = o.detunings;
  if (o.phi1) c.militello.phi1 = *o.phi1;
  if (o.t_end) c.trajectory.t_end = *o.t_end;
  if (o.dt_out) c.trajectory.dt_out = *o.dt_out;
  if (o.levels) {
    c.dimer.levels = *o.levels;
    c.militello.levels = *o.levels;
  }
  if (o.seed) c.sampler.seed = *o.seed;
  if (o.interval) c.correlations.interval = *o.interval;
  if (!o.out.empty()) c.output_dir = o.out;
  c.validate();
  return c;
}

std::string tag(double detuning) {
  std::ostringstream ss;
  ss << std::setprecision(10) << detuning;
  return "d" + ss.str();
}

class Manifest {
 public:
  Manifest(std::string command, const qsync::RunConfig& c) : start_(std::chrono::steady_clock::now()) {
    doc_["manifest_version"] = 1;
    doc_["command"] = std::move(command);
    doc_["config"] = qsync::to_json(c);
    doc_["seed"] = c.sampler.seed;
    doc_["git_revision"] = QSYNC_GIT_REVISION;
    doc_["versions"] = {{"qsync", qsync::kVersion},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)},
                        {"compiler", __VERSION__}};
    doc_["outputs"] = qsync::Json::array();
    doc_["runs"] = qsync::Json::array();
    doc_["warnings"] = qsync::Json::array();
  }

  void output(const fs::path& p) {
    std::lock_guard lock(mutex_);
    doc_["outputs"].push_back(p.filename().string());
  }
  void run(qsync::Json j) {
    std::lock_guard lock(mutex_);
    doc_["runs"].push_back(std::move(j));
  }
  void warn(const std::string& w) {
    std::lock_guard lock(mutex_);
    std::cerr << "warning: " << w << "\n";
    doc_["warnings"].push_back(w);
  }

  void write(const fs::path& dir) {
    doc_["timings"] = {{"wall_seconds", seconds_since(start_)}};
    std::ofstream(dir / "manifest.json") << doc_.dump(2) << "\n";
  }

  static double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  }

 private:
  qsync::Json doc_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point start_;
};

template <class Writer>
fs::path write_file(const fs::path& dir, const std::string& name, Manifest& m, Writer&& w) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  if (!out) throw qsync::ConfigError("cannot write '" + p.string() + "'");
  w(out);
  m.output(p);
  return p;
}

fs::path prepare_dir(const qsync::RunConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw qsync::ConfigError("output_dir: cannot create '" + c.output_dir + "': " + ec.message());
  return dir;
}

// Rows are ordered by detuning, independent of completion order.
std::vector<qsync::Json> ordered(std::size_t n) { return std::vector<qsync::Json>(n); }

int cmd_simulate(const qsync::RunConfig& c, std::size_t workers) {
  const fs::path dir = prepare_dir(c);
  Manifest m("simulate", c);
  auto runs = ordered(c.detunings.size());
  std::mutex io;
  qsync::parallel_for(c.detunings.size(), workers, [&](std::size_t k) {
    const double d = c.detunings[k];
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = qsync::simulate(c, d);
    write_file(dir, "trajectory_" + tag(d) + ".csv", m,
               [&](std::ostream& os) { qsync::write_trajectory_csv(os, r.trajectory, r.time_label); });
    write_file(dir, "sync_" + tag(d) + ".csv", m, [&](std::ostream& os) { qsync::write_sync_csv(os, r.sync, r.time_label); });
    qsync::Json pj = qsync::to_json(r.plateau);
    pj["delta_omega"] = d;
    pj["window"] = r.sync.window;
    write_file(dir, "plateau_" + tag(d) + ".json", m, [&](std::ostream& os) { os << pj.dump(2) << "\n"; });
    runs[k] = {{"delta_omega", d},
               {"seconds", Manifest::seconds_since(t0)},
               {"rhs_evaluations", r.trajectory.stats.rhs_evaluations},
               {"max_trace_drift", r.trajectory.max_trace_drift},
               {"min_eigenvalue", r.trajectory.min_eigenvalue}};
    std::lock_guard lock(io);
    std::cout << "delta_omega=" << d << " synchronised=" << (r.plateau.synchronised ? "true" : "false");
    if (r.plateau.stable_value) std::cout << " C*=" << *r.plateau.stable_value;
    std::cout << " tail_range=" << r.plateau.tail_range << "\n";
  });
  for (auto& r : runs) m.run(std::move(r));
  m.write(dir);
  return kExitOk;
}

int cmd_sweep(const qsync::RunConfig& c, std::size_t workers, bool with_correlations) {
  const fs::path dir = prepare_dir(c);
  Manifest m("sweep", c);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = qsync::detuning_sweep(c, with_correlations, workers);
  write_file(dir, "sweep.csv", m, [&](std::ostream& os) { qsync::write_sweep_csv(os, rows); });
  bool any_ok = false;
  for (const auto& r : rows) {
    if (r.ok) {
      any_ok = true;
    } else {
      m.warn("delta_omega=" + std::to_string(r.detuning) + " failed: " + r.error);
    }
    m.run({{"delta_omega", r.detuning}, {"ok", r.ok}, {"error", r.error}, {"plateau", qsync::to_json(r.plateau)}});
  }
  if (with_correlations) {
    const auto reg = qsync::discord_regression(rows);
    if (!reg.fit) m.warn(reg.warning);
    write_file(dir, "regression.json", m, [&](std::ostream& os) { os << qsync::to_json(reg).dump(2) << "\n"; });
    if (reg.fit) std::cout << "regression slope=" << reg.fit->slope << " intercept=" << reg.fit->intercept
                           << " r=" << reg.fit->pearson_r << "\n";
  } else {
    m.warn("regression needs --with-correlations; omitted");
  }
  for (const auto& r : rows) {
    std::cout << "delta_omega=" << r.detuning << " ";
    if (!r.ok) {
      std::cout << "failed\n";
      continue;
    }
    std::cout << "synchronised=" << (r.plateau.synchronised ? "true" : "false");
    if (r.plateau.stable_value) std::cout << " C*=" << *r.plateau.stable_value;
    if (r.long_time) std::cout << " D_long=" << r.long_time->discord;
    std::cout << "\n";
  }
  m.run({{"sweep_seconds", Manifest::seconds_since(t0)}});
  m.write(dir);
  return any_ok ? kExitOk : kExitNumerical;
}

int cmd_correlations(const qsync::RunConfig& c, std::size_t workers) {
  const fs::path dir = prepare_dir(c);
  Manifest m("correlations", c);
  auto runs = ordered(c.detunings.size());
  qsync::parallel_for(c.detunings.size(), workers, [&](std::size_t k) {
    const double d = c.detunings[k];
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = qsync::simulate(c, d, true);
    const auto pts = qsync::correlation_dynamics(r.trajectory, qsync::correlation_options(c));
    write_file(dir, "correlations_" + tag(d) + ".csv", m,
               [&](std::ostream& os) { qsync::write_correlation_csv(os, pts, r.time_label); });
    std::size_t unconverged = 0;
    for (const auto& p : pts) unconverged += p.triple.converged ? 0 : 1;
    if (unconverged > 0) m.warn(tag(d) + ": " + std::to_string(unconverged) + " points did not converge");
    runs[k] = {{"delta_omega", d}, {"seconds", Manifest::seconds_since(t0)}, {"points", pts.size()},
               {"unconverged", unconverged}, {"plateau", qsync::to_json(r.plateau)}};
  });
  for (auto& r : runs) m.run(std::move(r));
  m.write(dir);
  return kExitOk;
}

int cmd_validate(double tolerance_scale) {
  const auto results = qsync::run_oracle_suite(tolerance_scale);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-26s %s  max_error=%.3e  tolerance=%.3e\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.max_error,
                r.tolerance);
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient synchronisation and mode correlations in open vibronic systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qsync::kVersion));

  Overrides o;
  bool with_correlations = false;
  double tolerance_scale = 1.0;
  auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory per detuning");
  auto* sweep = app.add_subcommand("sweep", "Classify a list of detunings");
  auto* correlations = app.add_subcommand("correlations", "Mutual information, classical correlation and discord");
  auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");
  for (auto* cmd : {simulate, sweep, correlations}) add_common(cmd, o);
  sweep->add_flag("--with-correlations", with_correlations, "Evaluate long-time correlations and the regression");
  validate->add_option("--inject-tolerance-scale", tolerance_scale, "Multiply every tolerance (test hook)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (validate->parsed()) {
    try {
      return cmd_validate(tolerance_scale);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    }
  }

  qsync::RunConfig config;
  std::size_t workers = 1;
  try {
    CLI::App* active = simulate->parsed() ? simulate : sweep->parsed() ? sweep : correlations;
    config = resolve(o, active->count("--preset") > 0);
    workers = o.workers ? *o.workers : qsync::default_workers();
    if (workers < 1) throw qsync::ConfigError("--workers: must be >= 1");
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (o.dump_preset) {
    std::cout << qsync::to_json(config).dump(2) << "\n";
    return kExitOk;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config, workers);
    if (sweep->parsed()) return cmd_sweep(config, workers, with_correlations);
    return cmd_correlations(config, workers);
  } catch (const qsync::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
