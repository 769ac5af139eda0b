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

// Built-in oracle checks with known answers, run by `qsync validate`.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qsync/correlations.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/models.hpp"
#include "qsync/sync.hpp"
#include "qsync/units.hpp"

namespace qsync {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

namespace detail {

inline Matrix random_density(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix g = ginibre(static_cast<std::size_t>(n), rng);
  Matrix r = g * g.adjoint();
  return r / r.trace().real();
}

inline Matrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix g = ginibre(static_cast<std::size_t>(n), rng);
  return 0.5 * (g + g.adjoint());
}

inline CheckResult finish(std::string name, double err, double tol) { return {std::move(name), err, tol, err <= tol}; }

}  // namespace detail

/// C(sin at, sin(at + phi) | 2 pi / a) = cos phi, at the dimer's sampling.
inline CheckResult check_sinusoid_phase(double tolerance = 2e-3) {
  const double a = units::kAngularPerWavenumber * 1111.0;
  const double window = 2.0 * std::numbers::pi / a;
  const double dt = 0.002;
  const std::size_t n = 400;
  double err = 0.0;
  for (double phi : {0.0, std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4,
                     std::numbers::pi}) {
    std::vector<double> f1(n), f2(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = dt * static_cast<double>(k);
      f1[k] = std::sin(a * t);
      f2[k] = std::sin(a * t + phi);
    }
    const SampledSignal s1{f1, dt}, s2{f2, dt};
    for (std::size_t k = 0; k + 20 < n; k += 7) {
      err = std::max(err, std::abs(pearson_window(s1, s2, dt * static_cast<double>(k), window) - std::cos(phi)));
    }
  }
  return detail::finish("sinusoid_cos_phi", err, tolerance);
}

/// Dense right-hand side, vectorised Liouvillian and the compiled sparse
/// generator agree on random 8-dimensional systems.
inline CheckResult check_liouvillian_equivalence(double tolerance = 1e-10, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  const SpaceLayout layout({2, 4});
  double err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Operator H(layout, detail::random_hermitian(8, rng));
    std::vector<LindbladChannel> channels;
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    for (int c = 0; c < 3; ++c) channels.push_back({Operator(layout, detail::ginibre(8, rng)), rate(rng), "random"});
    const Operator rho(layout, detail::random_density(8, rng));
    const Matrix dense = lindblad_rhs(rho, H, channels).matrix();
    const Matrix super = unvectorize(build_liouvillian(H, channels) * vectorize(rho.matrix()), 8);
    detail::LindbladGenerator gen(H, channels, 1.0);
    Matrix compiled;
    gen(0.0, rho.matrix(), compiled);
    err = std::max({err, (dense - super).cwiseAbs().maxCoeff(), (dense - compiled).cwiseAbs().maxCoeff()});
  }
  return detail::finish("liouvillian_equivalence", err, tolerance);
}

/// A truncated thermal state is stationary under the mode's thermal channels.
inline CheckResult check_thermal_stationarity(double tolerance = 1e-8) {
  const DimerParams p = DimerParams::pe545();
  const auto n = p.levels;
  const Operator H = p.omega1 * number(n);
  const double B = bose_occupation(p.omega1, p.kBT);
  const std::vector<LindbladChannel> channels{
      {annihilation(n), units::rate_to_wavenumber(p.gamma_th * (1.0 + B)), "relax"},
      {creation(n), units::rate_to_wavenumber(p.gamma_th * B), "excite"}};
  const DensityMatrix rho = thermal_state(p.omega1, p.kBT, n);
  const Matrix residual = units::kAngularPerWavenumber * lindblad_rhs(rho.op(), H, channels).matrix();
  return detail::finish("thermal_stationarity", residual.cwiseAbs().maxCoeff(), tolerance);
}

/// Damped precessing qubit against its closed form.
inline CheckResult check_qubit_decay(double tolerance = 1e-7) {
  const double w = 3.0, gamma = 0.7;
  const SpaceLayout layout = SpaceLayout::single(2, "qubit");
  const Operator H = w * transition(2, 1, 1);
  const std::vector<LindbladChannel> channels{{transition(2, 0, 1), gamma, "decay"}};
  Vector psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const DensityMatrix rho0 = pure_state(layout, psi);
  EvolveOptions opt;
  opt.t_end = 4.0;
  opt.dt_out = 0.01;
  opt.store_stride = 1;
  const Trajectory traj = evolve(rho0, OpenSystem{H, channels, 1.0}, opt);
  double err = 0.0;
  for (const auto& snap : traj.states) {
    const double t = traj.times[snap.index];
    const Complex coh = 0.5 * std::exp(Complex(-0.5 * gamma, w) * t);  // <0|rho|1>
    err = std::max({err, std::abs(snap.state.matrix()(1, 1).real() - 0.5 * std::exp(-gamma * t)),
                    std::abs(snap.state.matrix()(0, 1) - coh)});
  }
  return detail::finish("qubit_decay_closed_form", err, tolerance);
}

/// Bell-state correlations: I = 2 ln 2, J = D = ln 2.
inline CheckResult check_bell_discord(double tolerance = 1e-3) {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix bell = pure_state(SpaceLayout({2, 2}), psi);
  const auto t = discord(bell, {{0}, {1}});
  const double ln2 = std::log(2.0);
  const double err = std::max({std::abs(t.mutual_information - 2 * ln2), std::abs(t.classical - ln2), std::abs(t.discord - ln2)});
  return detail::finish("bell_state_discord", err, tolerance);
}

/// Every check, with tolerances multiplied by `tolerance_scale` (a value
/// far below one must make the suite fail).
inline std::vector<CheckResult> run_oracle_suite(double tolerance_scale = 1.0) {
  return {check_sinusoid_phase(2e-3 * tolerance_scale), check_liouvillian_equivalence(1e-10 * tolerance_scale),
          check_thermal_stationarity(1e-8 * tolerance_scale), check_qubit_decay(1e-7 * tolerance_scale),
          check_bell_discord(1e-3 * tolerance_scale)};
}

}  // namespace qsync
