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

// Lindblad evolution, the vectorised Liouvillian used to cross-check it,
// initial states, and eigenbasis diagnostics.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "qsync/detail/dop853.hpp"
#include "qsync/hilbert.hpp"
#include "qsync/models.hpp"

namespace qsync {

/// Right-hand side of the master equation,
///   d rho = -i[H, rho] + sum_v G_v (O rho O^+ - 1/2 {O^+ O, rho}),
/// in the energy units of H (no time-scale factor applied).
inline Operator lindblad_rhs(const Operator& rho, const Operator& H, std::span<const LindbladChannel> channels) {
  rho.require_compatible(H);
  const Matrix& r = rho.matrix();
  const Complex i(0.0, 1.0);
  Matrix out = -i * (H.matrix() * r - r * H.matrix());
  for (const auto& ch : channels) {
    rho.require_compatible(ch.op);
    const Matrix& o = ch.op.matrix();
    const Matrix ooh = o.adjoint() * o;
    out += ch.rate * (o * r * o.adjoint() - 0.5 * (r * ooh + ooh * r));
  }
  return Operator(rho.layout(), std::move(out));
}

/// Column-stacking superoperator L with L vec(rho) = vec(lindblad_rhs(rho)).
/// Refuses systems above `max_dim` (the superoperator has max_dim^4 entries).
inline Matrix build_liouvillian(const Operator& H, std::span<const LindbladChannel> channels,
                                Eigen::Index max_dim = 64) {
  const Eigen::Index n = H.dim();
  if (n > max_dim) {
    throw InvalidInput("build_liouvillian: dimension " + std::to_string(n) + " exceeds cap " + std::to_string(max_dim));
  }
  const Matrix id = Matrix::Identity(n, n);
  auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return out;
  };
  // vec(A X B) = (B^T (x) A) vec(X)
  const Complex i(0.0, 1.0);
  Matrix L = -i * (kron(id, H.matrix()) - kron(H.matrix().transpose(), id));
  for (const auto& ch : channels) {
    H.require_compatible(ch.op);
    const Matrix& o = ch.op.matrix();
    const Matrix ooh = o.adjoint() * o;
    L += ch.rate * (kron(o.conjugate(), o) - 0.5 * kron(id, ooh) - 0.5 * kron(ooh.transpose(), id));
  }
  return L;
}

inline Vector vectorize(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvectorize(const Vector& v, Eigen::Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

// ---------------------------------------------------------------------------

struct NamedObservable {
  std::string name;
  Operator op;
};

struct EvolveOptions {
  double t_end = 10.0;
  double dt_out = 0.002;
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Keep every n-th output state (0 keeps none).
  std::size_t store_stride = 0;
  /// Full eigenvalue check on every n-th output state (0 disables; stored
  /// states are always checked).
  std::size_t positivity_stride = 250;
  double trace_tol = 1e-8;
  double min_eigenvalue = -1e-8;
};

struct Snapshot {
  std::size_t index = 0;  // position on the output grid
  DensityMatrix state;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  std::vector<Snapshot> states;
  detail::Dop853Stats stats;
  double max_trace_drift = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  const std::vector<double>& observable(std::string_view name) const {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == name) return series[k];
    }
    throw InvalidInput("Trajectory: no observable named '" + std::string(name) + "'");
  }
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline SparseMatrix sparse(const Matrix& m, double drop = 0.0) {
  SparseMatrix s = m.sparseView(1.0, drop);
  s.makeCompressed();
  return s;
}

/// Master-equation generator compiled to sparse form with the time scale
/// folded in: d rho/dt = -i(K rho - rho K^+) + sum J rho J^+,
/// K = s(H - i/2 sum G O^+ O), J = sqrt(s G) O.
///
/// rho is Hermitian along the flow, so every product is arranged as
/// dense * sparse (K rho = (rho K^+)^+), which streams over columns.
class LindbladGenerator {
 public:
  LindbladGenerator(const Operator& H, std::span<const LindbladChannel> channels, double time_scale) {
    Matrix k = H.matrix();
    for (const auto& ch : channels) {
      H.require_compatible(ch.op);
      if (ch.rate < 0.0) throw InvalidInput("LindbladChannel: negative rate");
      if (ch.rate == 0.0) continue;
      k -= Complex(0.0, 0.5 * ch.rate) * (ch.op.matrix().adjoint() * ch.op.matrix());
      const Matrix j = std::sqrt(time_scale * ch.rate) * ch.op.matrix();
      jumps_adj_.push_back(sparse(j.adjoint()));
    }
    k_adj_ = sparse((time_scale * k).adjoint());
  }

  void operator()(double /*t*/, const Matrix& rho, Matrix& out) {
    const Complex i(0.0, 1.0);
    // -i(K rho - rho K^+) = i(W - W^+) with W = rho K^+
    work_.noalias() = rho * k_adj_;
    out = i * work_;
    out -= i * work_.adjoint();
    if (jumps_adj_.empty()) return;
    jumps_.setZero(rho.rows(), rho.cols());
    for (const auto& jh : jumps_adj_) {
      // A^+ J^+ = J rho J^+ up to its adjoint, with A = rho J^+
      work_.noalias() = rho * jh;
      work2_ = work_.adjoint();
      jumps_.noalias() += work2_ * jh;
    }
    // The anti-Hermitian subspace is unstable under the rearranged K terms,
    // so the output is kept exactly Hermitian.
    work_ = jumps_ + jumps_.adjoint();
    out += 0.5 * work_;
  }

 private:
  SparseMatrix k_adj_;
  std::vector<SparseMatrix> jumps_adj_;
  Matrix work_;
  Matrix work2_;
  Matrix jumps_;
};

/// tr(rho O) for a sparse O.
inline Complex sparse_trace_product(const SparseMatrix& o, const Matrix& rho) {
  Complex acc = 0.0;
  for (Eigen::Index r = 0; r < o.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(o, r); it; ++it) acc += it.value() * rho(it.col(), r);
  }
  return acc;
}

}  // namespace detail

/// Integrate the master equation from rho0 on the uniform grid
/// 0, dt_out, ..., t_end, recording the named observables.
inline Trajectory evolve(const DensityMatrix& rho0, const OpenSystem& system, const EvolveOptions& opt,
                         std::span<const NamedObservable> observables = {}) {
  if (!(opt.t_end > 0.0) || !(opt.dt_out > 0.0)) throw InvalidInput("evolve: t_end and dt_out must be positive");
  if (!rho0.layout().compatible(system.hamiltonian.layout())) throw InvalidInput("evolve: layout mismatch");
  for (const auto& ob : observables) {
    if (!ob.op.layout().compatible(rho0.layout())) throw InvalidInput("evolve: observable layout mismatch");
    if (!ob.op.is_hermitian()) throw InvalidInput("evolve: observable '" + ob.name + "' is not Hermitian");
  }

  Trajectory traj;
  const auto n_out = static_cast<std::size_t>(std::floor(opt.t_end / opt.dt_out + 1e-9)) + 1;
  traj.times.reserve(n_out);
  for (const auto& ob : observables) {
    traj.names.push_back(ob.name);
    traj.series.emplace_back();
    traj.series.back().reserve(n_out);
  }
  std::vector<detail::SparseMatrix> obs_sparse;
  for (const auto& ob : observables) obs_sparse.push_back(detail::sparse(ob.op.matrix()));

  const StateTolerance tol{1e-10, opt.trace_tol, opt.min_eigenvalue};
  // Stored states carry the system's subsystem labels.
  const SpaceLayout& layout = system.hamiltonian.layout();

  auto emit = [&](std::size_t index, double t, Matrix state) {
    state = 0.5 * (state + state.adjoint()).eval();
    const double drift = std::abs(state.trace() - 1.0);
    traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
    if (drift > opt.trace_tol || !std::isfinite(drift)) {
      throw IntegrationError("evolve: trace drift " + std::to_string(drift) + " at t = " + std::to_string(t));
    }
    traj.times.push_back(t);
    for (std::size_t k = 0; k < obs_sparse.size(); ++k) {
      traj.series[k].push_back(detail::sparse_trace_product(obs_sparse[k], state).real());
    }
    const bool store = opt.store_stride > 0 && index % opt.store_stride == 0;
    const bool check = store || (opt.positivity_stride > 0 && index % opt.positivity_stride == 0);
    if (check) {
      try {
        DensityMatrix rho(Operator(layout, std::move(state)), tol);
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, rho.min_eigenvalue());
        if (store) traj.states.push_back({index, std::move(rho)});
      } catch (const InvalidInput& e) {
        throw IntegrationError(std::string("evolve: invalid state at t = ") + std::to_string(t) + ": " + e.what());
      }
    }
  };

  detail::LindbladGenerator gen(system.hamiltonian, system.channels, system.time_scale);
  detail::Dop853Options ode_opt;
  ode_opt.rtol = opt.rtol;
  ode_opt.atol = opt.atol;
  detail::Dop853<Matrix, detail::LindbladGenerator> ode(std::move(gen), 0.0, rho0.matrix(), ode_opt);

  emit(0, 0.0, rho0.matrix());
  std::size_t next = 1;
  while (next < n_out) {
    const double t_last = static_cast<double>(n_out - 1) * opt.dt_out;
    ode.step(t_last);
    while (next < n_out && static_cast<double>(next) * opt.dt_out <= ode.t() * (1.0 + 1e-14)) {
      const double tn = static_cast<double>(next) * opt.dt_out;
      emit(next, tn, tn >= ode.t() ? ode.y() : ode.dense(tn));
      ++next;
    }
  }
  traj.stats = ode.stats();
  return traj;
}

/// Writes `time_label, <observables...>` with 12 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::string_view time_label = "t_ps") {
  os << time_label;
  for (const auto& n : traj.names) os << ',' << n;
  os << '\n' << std::setprecision(12);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    os << traj.times[r];
    for (const auto& s : traj.series) os << ',' << s[r];
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Initial states and standard observables

/// |E2><E2| (x) thermal (x) thermal.
inline DensityMatrix dimer_initial_state(const DimerModel& model) {
  const auto& p = model.params;
  auto mode_state = [&](double omega) {
    return p.kBT > 0.0 ? thermal_state(omega, p.kBT, p.levels) : basis_state(p.levels, 0);
  };
  const Operator rho = tensor({basis_state(2, 1).op(), mode_state(p.omega1).op(), mode_state(p.omega2).op()});
  return DensityMatrix(Operator(model.layout, rho.matrix()));
}

/// |e1><e1| (x) vacuum (x) coherent(alpha).
inline DensityMatrix militello_initial_state(const MilitelloParams& p, Complex alpha) {
  const Operator rho = tensor({basis_state(2, 0).op(), basis_state(p.levels, 0).op(), coherent_state(alpha, p.levels).op()});
  return DensityMatrix(Operator(detail::two_mode_layout(p.levels), rho.matrix()));
}

inline std::vector<NamedObservable> dimer_observables(const DimerModel& model) {
  return {{"X1", model.position(1)},
          {"X2", model.position(2)},
          {"pop_E1", model.exciton_population(0)},
          {"pop_E2", model.exciton_population(1)}};
}

inline std::vector<NamedObservable> militello_observables(const MilitelloParams& p) {
  const auto layout = detail::two_mode_layout(p.levels);
  return {{"X1", embed(position(p.levels), layout, 1)},
          {"X2", embed(position(p.levels), layout, 2)},
          {"pop_e1", embed(transition(2, 0, 0), layout, 0)},
          {"pop_e2", embed(transition(2, 1, 1), layout, 0)}};
}

// ---------------------------------------------------------------------------

struct EigenDiagnostics {
  Eigen::VectorXd energies;  // ascending
  Matrix eigenvectors;       // columns |psi_j>
  Matrix X1;                 // <psi_k| X1 |psi_j>
  Matrix X2;
};

inline EigenDiagnostics eigen_diagnostics(const Operator& H, const Operator& X1, const Operator& X2) {
  if (!H.is_hermitian()) throw InvalidInput("eigen_diagnostics: Hamiltonian is not Hermitian");
  H.require_compatible(X1);
  H.require_compatible(X2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H.matrix());
  EigenDiagnostics d;
  d.energies = es.eigenvalues();
  d.eigenvectors = es.eigenvectors();
  d.X1 = d.eigenvectors.adjoint() * X1.matrix() * d.eigenvectors;
  d.X2 = d.eigenvectors.adjoint() * X2.matrix() * d.eigenvectors;
  return d;
}

}  // namespace qsync
