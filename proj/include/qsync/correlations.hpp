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

// Mutual information, measurement-maximised classical correlation and
// discord between two groups of subsystems.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qsync/dynamics.hpp"
#include "qsync/errors.hpp"
#include "qsync/hilbert.hpp"

namespace qsync {

/// Eigenvalues below this are treated as exact zeros in entropies.
inline constexpr double kEntropyCutoff = 1e-12;

/// -sum lambda ln lambda over the spectrum of a Hermitian matrix.
inline double von_neumann_entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double l : es.eigenvalues()) {
    if (l > kEntropyCutoff) s -= l * std::log(l);
  }
  return std::max(s, 0.0);
}

inline double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.matrix()); }

/// Two disjoint subsystem groups covering a layout. `a` is the measured
/// side for classical correlation.
struct Bipartition {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;

  void validate(const SpaceLayout& layout) const {
    if (a.empty() || b.empty()) throw InvalidInput("Bipartition: both groups must be nonempty");
    std::vector<int> seen(layout.subsystems(), 0);
    for (auto group : {&a, &b}) {
      for (std::size_t k : *group) {
        if (k >= layout.subsystems()) throw InvalidInput("Bipartition: subsystem index out of range");
        ++seen[k];
      }
    }
    for (int c : seen) {
      if (c != 1) throw InvalidInput("Bipartition: groups must partition the layout");
    }
  }

  Bipartition swapped() const { return {b, a}; }
};

/// Reorders subsystems so that `order[k]` becomes position k.
inline Operator permute_subsystems(const Operator& op, std::span<const std::size_t> order) {
  const auto& layout = op.layout();
  const std::size_t n = layout.subsystems();
  if (order.size() != n) throw InvalidInput("permute_subsystems: order must list every subsystem");
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (sorted[k] != k) throw InvalidInput("permute_subsystems: not a permutation");
  }
  std::vector<std::size_t> dims, new_dims;
  std::vector<std::string> labels;
  for (std::size_t k : order) {
    new_dims.push_back(layout.dims()[k]);
    labels.push_back(layout.labels()[k]);
  }
  // Old flat index of every new flat index.
  const auto total = static_cast<Eigen::Index>(layout.total());
  std::vector<Eigen::Index> old_stride(n, 1);
  for (std::size_t k = n; k-- > 1;) old_stride[k - 1] = old_stride[k] * static_cast<Eigen::Index>(layout.dims()[k]);
  std::vector<Eigen::Index> map(static_cast<std::size_t>(total));
  std::vector<std::size_t> digit(n, 0);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index old = 0;
    for (std::size_t k = 0; k < n; ++k) old += static_cast<Eigen::Index>(digit[k]) * old_stride[order[k]];
    map[static_cast<std::size_t>(flat)] = old;
    for (std::size_t k = n; k-- > 0;) {
      if (++digit[k] < new_dims[k]) break;
      digit[k] = 0;
    }
  }
  Matrix out(total, total);
  const Matrix& m = op.matrix();
  for (Eigen::Index j = 0; j < total; ++j) {
    for (Eigen::Index i = 0; i < total; ++i) out(i, j) = m(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]);
  }
  return Operator(SpaceLayout(std::move(new_dims), std::move(labels)), std::move(out));
}

/// I(A:B) = S(A) + S(B) - S(AB), clipped at zero.
inline double mutual_information(const DensityMatrix& rho, const Bipartition& split) {
  split.validate(rho.layout());
  const double sa = von_neumann_entropy(partial_trace(rho.op(), split.a).matrix());
  const double sb = von_neumann_entropy(partial_trace(rho.op(), split.b).matrix());
  const double sab = von_neumann_entropy(rho.matrix());
  return std::max(sa + sb - sab, 0.0);
}

// ---------------------------------------------------------------------------
// Measurement search

/// Search over rank-1 projective measurements {U|k><k|U^+} on the measured
/// side. Each batch draws Haar-random unitaries; batch 0 also tries the
/// computational basis and the reduced-state eigenbasis. After every batch
/// the incumbent is refined by gradient ascent on the unitary group. Batch b
/// draws from a stream seeded by (seed, b), so a larger budget replays a
/// smaller one exactly and the reported maximum is monotone in budget.
/// Converged means the maximum improved by at most `rel_tol` (relative)
/// over the last `patience` batches.
struct MeasurementSampler {
  std::uint64_t seed = 20240601;
  std::size_t batch_size = 64;
  std::size_t max_batches = 200;
  double rel_tol = 1e-4;
  std::size_t patience = 5;
  std::size_t refine_steps = 40;  // gradient steps per local ascent; 0 = pure sampling
  std::size_t max_measured_dim = 16;

  void validate() const {
    if (batch_size < 1 || max_batches < 1 || patience < 1) throw InvalidInput("MeasurementSampler: counts must be >= 1");
    if (!(rel_tol > 0.0)) throw InvalidInput("MeasurementSampler: rel_tol must be positive");
  }
};

struct ClassicalCorrelation {
  double value = 0.0;
  std::size_t samples = 0;
  bool converged = false;
  Matrix best_basis;  // columns are the optimal measurement vectors
};

namespace detail {

inline Matrix ginibre(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix z(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = Complex(n01(rng), n01(rng));
  }
  return z;
}

/// Q from QR with R's diagonal made positive; Haar-distributed for Ginibre input.
inline Matrix unitary_from(const Matrix& z) {
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

inline Matrix haar_unitary(std::size_t d, std::mt19937_64& rng) { return unitary_from(ginibre(d, rng)); }

/// exp(omega) for anti-Hermitian omega.
inline Matrix exp_anti_hermitian(const Matrix& omega) {
  const Matrix h = Complex(0.0, -1.0) * omega;  // Hermitian
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Vector phases = (Complex(0.0, 1.0) * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// J(U) = S(rho_B) - sum_k p_k S(rho_B^k) for rho on A (x) B, A first,
/// measuring the columns of U.
class MeasurementObjective {
 public:
  MeasurementObjective(const Matrix& rho, Eigen::Index da, Eigen::Index db) : rho_(rho), da_(da), db_(db) {
    Matrix rb = Matrix::Zero(db, db);
    for (Eigen::Index a = 0; a < da; ++a) rb += rho.block(a * db, a * db, db, db);
    s_b_ = von_neumann_entropy(rb);
  }

  double operator()(const Matrix& u) { return evaluate(u, nullptr); }

  /// Value, plus the ascent direction Omega (anti-Hermitian, U -> U exp(t Omega)).
  double operator()(const Matrix& u, Matrix& omega) { return evaluate(u, &omega); }

 private:
  double evaluate(const Matrix& u, Matrix* omega) {
    // W = (U^+ (x) I) rho; sigma_k = sum_a' W[k, a'] U(a', k)
    w_.setZero(rho_.rows(), rho_.cols());
    for (Eigen::Index k = 0; k < da_; ++k) {
      for (Eigen::Index a = 0; a < da_; ++a) w_.middleRows(k * db_, db_) += std::conj(u(a, k)) * rho_.middleRows(a * db_, db_);
    }
    Matrix g;
    if (omega) g.setZero(da_, da_);
    double cond = 0.0;
    for (Eigen::Index k = 0; k < da_; ++k) {
      sigma_.setZero(db_, db_);
      for (Eigen::Index a = 0; a < da_; ++a) sigma_ += u(a, k) * w_.block(k * db_, a * db_, db_, db_);
      const double p = sigma_.trace().real();
      if (p <= kEntropyCutoff) continue;
      sigma_ = 0.5 * (sigma_ + sigma_.adjoint()).eval() / p;
      Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_);
      double s = 0.0;
      for (double l : es.eigenvalues()) {
        if (l > kEntropyCutoff) s -= l * std::log(l);
      }
      cond += p * std::max(s, 0.0);
      if (!omega) continue;
      // dJ = sum_k tr(L_k dsigma_k), L_k = log(sigma_k / p_k)
      //    = 2 Re sum_j <u_k|M_k|u_j> X_jk,  M_k = tr_B[(I (x) L_k) rho]
      const Eigen::VectorXd logs = es.eigenvalues().cwiseMax(1e-14).array().log();
      const Matrix l = es.eigenvectors() * logs.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
      Matrix m(da_, da_);
      for (Eigen::Index a = 0; a < da_; ++a) {
        for (Eigen::Index ap = 0; ap < da_; ++ap) {
          m(a, ap) = l.transpose().cwiseProduct(rho_.block(a * db_, ap * db_, db_, db_)).sum();
        }
      }
      g.row(k) = u.col(k).adjoint() * m * u;
    }
    if (omega) *omega = 0.5 * (g.adjoint() - g);
    return s_b_ - cond;
  }

  const Matrix& rho_;
  Eigen::Index da_, db_;
  double s_b_ = 0.0;
  Matrix w_, sigma_;
};

}  // namespace detail

/// J(B|A): the largest entropy reduction of B over projective measurements
/// on A. Failure to converge is reported, not thrown.
inline ClassicalCorrelation classical_correlation(const DensityMatrix& rho, const Bipartition& split,
                                                  const MeasurementSampler& sampler = {},
                                                  const std::optional<Matrix>& warm_start = std::nullopt) {
  sampler.validate();
  split.validate(rho.layout());
  std::vector<std::size_t> order = split.a;
  order.insert(order.end(), split.b.begin(), split.b.end());
  const Operator ordered = permute_subsystems(rho.op(), order);
  std::size_t da_u = 1;
  for (std::size_t k : split.a) da_u *= rho.layout().dims()[k];
  if (da_u > sampler.max_measured_dim) {
    throw InvalidInput("classical_correlation: measured side dimension " + std::to_string(da_u) + " exceeds " +
                       std::to_string(sampler.max_measured_dim));
  }
  const auto da = static_cast<Eigen::Index>(da_u);
  const auto db = static_cast<Eigen::Index>(rho.layout().total() / da_u);
  detail::MeasurementObjective objective(ordered.matrix(), da, db);

  ClassicalCorrelation best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](Matrix u) {
    const double v = objective(u);
    ++best.samples;
    if (v > best.value) {
      best.value = v;
      best.best_basis = std::move(u);
    }
  };

  // Backtracking gradient ascent from `u`; returns the value reached.
  auto refine = [&](Matrix& u, double v) {
    Matrix omega;
    double step = 1.0;
    for (std::size_t it = 0; it < sampler.refine_steps; ++it) {
      const double v0 = objective(u, omega);
      ++best.samples;
      const double slope = omega.squaredNorm();
      if (!(slope > 1e-24)) break;
      bool moved = false;
      for (int tries = 0; tries < 12; ++tries, step *= 0.5) {
        Matrix trial = u * detail::exp_anti_hermitian(step * omega);
        const double vt = objective(trial);
        ++best.samples;
        if (vt >= v0 + 1e-4 * step * slope) {
          if (vt - v0 <= 1e-12 * std::max(1.0, std::abs(v0))) it = sampler.refine_steps;  // stalled
          u = std::move(trial);
          v = vt;
          moved = true;
          step = std::min(step * 2.0, 1e3);
          break;
        }
      }
      if (!moved) break;
    }
    if (v > best.value) {
      best.value = v;
      best.best_basis = u;
    }
  };

  std::vector<double> history;
  for (std::size_t b = 0; b < sampler.max_batches; ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(sampler.seed), static_cast<std::uint32_t>(sampler.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::size_t drawn = 0;
    if (b == 0) {
      consider(Matrix::Identity(da, da));
      Matrix ra = Matrix::Zero(da, da);
      for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) ra(i, j) = ordered.matrix().block(i * db, j * db, db, db).trace();
      }
      consider(Eigen::SelfAdjointEigenSolver<Matrix>(ra).eigenvectors());
      drawn = 2;
      // Warm starts of the wrong shape (a reduced state) are ignored.
      if (warm_start && warm_start->rows() == da && warm_start->cols() == da) {
        consider(*warm_start);
        ++drawn;
      }
    }
    // The batch's best fresh draw starts a second local ascent.
    Matrix fresh;
    double fresh_value = -std::numeric_limits<double>::infinity();
    for (std::size_t s = drawn; s < sampler.batch_size; ++s) {
      Matrix u = detail::haar_unitary(da_u, rng);
      const double v = objective(u);
      ++best.samples;
      if (v > fresh_value) {
        fresh_value = v;
        fresh = u;
      }
      if (v > best.value) {
        best.value = v;
        best.best_basis = std::move(u);
      }
    }
    if (sampler.refine_steps > 0) {
      Matrix incumbent = best.best_basis;
      refine(incumbent, best.value);
      if (fresh.size() > 0) refine(fresh, fresh_value);
    }
    history.push_back(best.value);
    if (history.size() > sampler.patience) {
      const double old = history[history.size() - 1 - sampler.patience];
      if (best.value - old <= sampler.rel_tol * std::abs(best.value) + 1e-12) {
        best.converged = true;
        break;
      }
    }
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

struct CorrelationTriple {
  double mutual_information = 0.0;
  double classical = 0.0;
  double discord = 0.0;
  bool converged = false;
  std::size_t samples = 0;
};

/// (I, J, D) with J maximised over measurements on `split.a`; D is clipped
/// at zero.
inline CorrelationTriple discord(const DensityMatrix& rho, const Bipartition& split, const MeasurementSampler& sampler = {},
                                 const std::optional<Matrix>& warm_start = std::nullopt, Matrix* best_basis = nullptr) {
  CorrelationTriple out;
  out.mutual_information = mutual_information(rho, split);
  auto j = classical_correlation(rho, split, sampler, warm_start);
  out.classical = j.value;
  out.discord = std::max(out.mutual_information - j.value, 0.0);
  out.converged = j.converged;
  out.samples = j.samples;
  if (best_basis) *best_basis = std::move(j.best_basis);
  return out;
}

// ---------------------------------------------------------------------------
// Along a trajectory

struct CorrelationOptions {
  MeasurementSampler sampler;
  std::size_t stride = 1;          // over stored states
  bool measure_second = false;     // J(A|B) instead of J(B|A)
  /// Project each mode onto its leading `reduced_rank` eigenvectors when the
  /// discarded weight is below `reduced_weight`; 0 disables.
  std::size_t reduced_rank = 0;
  double reduced_weight = 1e-6;
  bool warm_start = true;
};

struct CorrelationPoint {
  double t = 0.0;
  CorrelationTriple triple;
};

namespace detail {

/// Leading-eigenvector compression of a two-party state, or nullopt when
/// the discarded weight on either side is too large.
inline std::optional<DensityMatrix> reduce_modes(const DensityMatrix& rho, std::size_t rank, double max_weight) {
  const auto& layout = rho.layout();
  if (layout.subsystems() != 2) return std::nullopt;
  std::vector<Matrix> proj;
  for (std::size_t side = 0; side < 2; ++side) {
    const std::size_t keep[] = {side};
    const Matrix r = partial_trace(rho.op(), keep).matrix();
    const auto d = static_cast<Eigen::Index>(layout.dims()[side]);
    if (static_cast<Eigen::Index>(rank) >= d) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Matrix> es(r);
    const auto k = static_cast<Eigen::Index>(rank);
    if (es.eigenvalues().head(d - k).sum() > max_weight) return std::nullopt;
    proj.push_back(es.eigenvectors().rightCols(k));  // d x k isometry
  }
  Matrix v(proj[0].rows() * proj[1].rows(), proj[0].cols() * proj[1].cols());
  for (Eigen::Index i = 0; i < proj[0].rows(); ++i) {
    for (Eigen::Index j = 0; j < proj[0].cols(); ++j) {
      v.block(i * proj[1].rows(), j * proj[1].cols(), proj[1].rows(), proj[1].cols()) = proj[0](i, j) * proj[1];
    }
  }
  Matrix reduced = v.adjoint() * rho.matrix() * v;
  reduced /= reduced.trace().real();
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  SpaceLayout small({rank, rank}, layout.labels());
  return DensityMatrix::without_positivity_check(Operator(std::move(small), std::move(reduced)), {1e-8, 1e-8, -1e-8});
}

}  // namespace detail

/// Correlations between the two modes (electronic degree traced out) at
/// every `stride`-th stored state.
inline std::vector<CorrelationPoint> correlation_dynamics(const Trajectory& traj, const CorrelationOptions& opt = {}) {
  if (opt.stride < 1) throw InvalidInput("correlation_dynamics: stride must be >= 1");
  if (traj.states.empty()) throw InvalidInput("correlation_dynamics: trajectory has no stored states");
  opt.sampler.validate();
  std::vector<CorrelationPoint> out;
  std::optional<Matrix> warm;
  for (std::size_t k = 0; k < traj.states.size(); k += opt.stride) {
    const auto& snap = traj.states[k];
    const auto& layout = snap.state.layout();
    const std::size_t e = layout.index_of("electronic");
    std::vector<std::size_t> modes;
    for (std::size_t s = 0; s < layout.subsystems(); ++s) {
      if (s != e) modes.push_back(s);
    }
    if (modes.size() != 2) throw InvalidInput("correlation_dynamics: expected two modes besides the electronic degree");
    DensityMatrix rho = DensityMatrix::without_positivity_check(partial_trace(snap.state.op(), modes));
    if (opt.reduced_rank > 0) {
      if (auto small = detail::reduce_modes(rho, opt.reduced_rank, opt.reduced_weight)) rho = std::move(*small);
    }
    Bipartition split{{0}, {1}};
    if (opt.measure_second) split = split.swapped();
    Matrix basis;
    CorrelationPoint pt;
    pt.t = traj.times[snap.index];
    pt.triple = discord(rho, split, opt.sampler, opt.warm_start ? warm : std::nullopt, &basis);
    if (opt.warm_start) warm = std::move(basis);
    out.push_back(pt);
  }
  return out;
}

inline void write_correlation_csv(std::ostream& os, std::span<const CorrelationPoint> pts, std::string_view time_label = "t_ps") {
  os << time_label << ",I,J,D,converged\n" << std::setprecision(12);
  for (const auto& p : pts) {
    os << p.t << ',' << p.triple.mutual_information << ',' << p.triple.classical << ',' << p.triple.discord << ','
       << (p.triple.converged ? 1 : 0) << '\n';
  }
}

}  // namespace qsync
