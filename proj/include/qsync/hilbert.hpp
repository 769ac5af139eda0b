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

// Dense operator algebra on truncated composite Hilbert spaces.
//
// Composite indices are row-major over the subsystem list: for dims
// (d0, d1, d2) the basis state |i0, i1, i2> sits at i0*d1*d2 + i1*d2 + i2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsync/errors.hpp"

namespace qsync {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class SpaceLayout {
 public:
  SpaceLayout() = default;

  explicit SpaceLayout(std::vector<std::size_t> dims, std::vector<std::string> labels = {})
      : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (dims_.empty()) throw InvalidInput("SpaceLayout: at least one subsystem is required");
    for (std::size_t d : dims_) {
      if (d == 0) throw InvalidInput("SpaceLayout: subsystem dimension must be positive");
    }
    if (labels_.empty()) {
      labels_.resize(dims_.size());
    } else if (labels_.size() != dims_.size()) {
      throw InvalidInput("SpaceLayout: label count does not match subsystem count");
    }
  }

  static SpaceLayout single(std::size_t dim, std::string label = {}) {
    return SpaceLayout({dim}, {std::move(label)});
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t subsystems() const { return dims_.size(); }

  std::size_t total() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  SpaceLayout concat(const SpaceLayout& other) const {
    auto dims = dims_;
    auto labels = labels_;
    dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
    labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
    return SpaceLayout(std::move(dims), std::move(labels));
  }

  /// Sub-layout over the given subsystem indices, kept in original order.
  SpaceLayout subset(std::span<const std::size_t> keep) const {
    auto sorted = normalized_subset(keep);
    std::vector<std::size_t> dims;
    std::vector<std::string> labels;
    for (std::size_t k : sorted) {
      dims.push_back(dims_[k]);
      labels.push_back(labels_[k]);
    }
    return SpaceLayout(std::move(dims), std::move(labels));
  }

  std::size_t index_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw InvalidInput("SpaceLayout: no subsystem labelled '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  /// Sorted, de-duplicated, range-checked copy of a subsystem index set.
  std::vector<std::size_t> normalized_subset(std::span<const std::size_t> keep) const {
    if (keep.empty()) throw InvalidInput("SpaceLayout: empty subsystem set");
    std::vector<std::size_t> sorted(keep.begin(), keep.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.back() >= dims_.size()) throw InvalidInput("SpaceLayout: subsystem index out of range");
    return sorted;
  }

  /// Same dimensions; labels are informational only.
  bool compatible(const SpaceLayout& other) const { return dims_ == other.dims_; }

  friend bool operator==(const SpaceLayout& a, const SpaceLayout& b) {
    return a.dims_ == b.dims_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::string> labels_;
};

class Operator {
 public:
  Operator() = default;

  Operator(SpaceLayout layout, Matrix matrix) : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto n = static_cast<Eigen::Index>(layout_.total());
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw InvalidInput("Operator: matrix side " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + " does not match layout dimension " + std::to_string(n));
    }
  }

  static Operator identity(const SpaceLayout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.total());
    return Operator(layout, Matrix::Identity(n, n));
  }

  static Operator zero(const SpaceLayout& layout) {
    const auto n = static_cast<Eigen::Index>(layout.total());
    return Operator(layout, Matrix::Zero(n, n));
  }

  const SpaceLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  Operator adjoint() const { return Operator(layout_, matrix_.adjoint()); }

  Complex trace() const { return matrix_.trace(); }

  /// Largest elementwise |A - A^dagger|.
  double hermiticity_error() const {
    if (matrix_.size() == 0) return 0.0;
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  }

  bool is_hermitian(double tol = 1e-10) const { return hermiticity_error() <= tol; }

  Operator& operator+=(const Operator& rhs) {
    require_compatible(rhs);
    matrix_ += rhs.matrix_;
    return *this;
  }
  Operator& operator-=(const Operator& rhs) {
    require_compatible(rhs);
    matrix_ -= rhs.matrix_;
    return *this;
  }
  Operator& operator*=(Complex s) {
    matrix_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= Complex(s); }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.require_compatible(b);
    return Operator(a.layout_, a.matrix_ * b.matrix_);
  }

  void require_compatible(const Operator& other) const {
    if (!layout_.compatible(other.layout_)) throw InvalidInput("Operator: layout mismatch");
  }

 private:
  SpaceLayout layout_;
  Matrix matrix_;
};

/// Acceptance thresholds for density-matrix validation.
struct StateTolerance {
  double hermiticity = 1e-10;
  double trace = 1e-10;
  double min_eigenvalue = -1e-8;
};

/// A Hermitian, unit-trace, positive semidefinite Operator. Validation runs
/// at construction and throws InvalidInput on violation.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(Operator op, const StateTolerance& tol = {}) : op_(std::move(op)) { validate(tol); }

  /// Skips the eigenvalue check (hermiticity and trace are still enforced).
  static DensityMatrix without_positivity_check(Operator op, const StateTolerance& tol = {}) {
    DensityMatrix rho;
    rho.op_ = std::move(op);
    rho.validate_trace_and_hermiticity(tol);
    return rho;
  }

  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  const SpaceLayout& layout() const { return op_.layout(); }
  Eigen::Index dim() const { return op_.dim(); }

  double purity() const { return (matrix() * matrix()).trace().real(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  operator const Operator&() const { return op_; }  // NOLINT(google-explicit-constructor)

 private:
  void validate_trace_and_hermiticity(const StateTolerance& tol) const {
    const double herm = op_.hermiticity_error();
    if (herm > tol.hermiticity) {
      throw InvalidInput("DensityMatrix: not Hermitian (max |rho - rho^dagger| = " + std::to_string(herm) + ")");
    }
    const double drift = std::abs(op_.trace() - 1.0);
    if (drift > tol.trace) throw InvalidInput("DensityMatrix: trace deviates from 1 by " + std::to_string(drift));
  }

  void validate(const StateTolerance& tol) const {
    validate_trace_and_hermiticity(tol);
    const double lo = min_eigenvalue();
    if (lo < tol.min_eigenvalue) {
      throw InvalidInput("DensityMatrix: negative eigenvalue " + std::to_string(lo));
    }
  }

  Operator op_;
};

// ---------------------------------------------------------------------------
// Construction

/// Kronecker product of the operators, in order, with concatenated layouts.
inline Operator tensor(std::span<const Operator> ops) {
  if (ops.empty()) throw InvalidInput("tensor: no operands");
  SpaceLayout layout = ops.front().layout();
  Matrix acc = ops.front().matrix();
  for (std::size_t k = 1; k < ops.size(); ++k) {
    const Matrix& b = ops[k].matrix();
    if (b.rows() == 0) throw InvalidInput("tensor: dimension-zero operand");
    Matrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i) {
      for (Eigen::Index j = 0; j < acc.cols(); ++j) {
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = acc(i, j) * b;
      }
    }
    acc = std::move(next);
    layout = layout.concat(ops[k].layout());
  }
  return Operator(std::move(layout), std::move(acc));
}

inline Operator tensor(std::initializer_list<Operator> ops) {
  return tensor(std::span<const Operator>(ops.begin(), ops.size()));
}

/// Lift a single-subsystem operator into `layout` at position `site`,
/// padding every other subsystem with the identity.
inline Operator embed(const Operator& local, const SpaceLayout& layout, std::size_t site) {
  if (site >= layout.subsystems()) throw InvalidInput("embed: subsystem index out of range");
  if (static_cast<std::size_t>(local.dim()) != layout.dims()[site]) {
    throw InvalidInput("embed: operator dimension does not match subsystem " + std::to_string(site));
  }
  std::vector<Operator> factors;
  factors.reserve(layout.subsystems());
  for (std::size_t k = 0; k < layout.subsystems(); ++k) {
    auto sub = SpaceLayout::single(layout.dims()[k], layout.labels()[k]);
    factors.push_back(k == site ? Operator(sub, local.matrix()) : Operator::identity(sub));
  }
  return tensor(factors);
}

inline Operator annihilation(std::size_t levels) {
  if (levels == 0) throw InvalidInput("annihilation: levels must be at least 1");
  const auto n = static_cast<Eigen::Index>(levels);
  Matrix b = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
  return Operator(SpaceLayout::single(levels), std::move(b));
}

inline Operator creation(std::size_t levels) { return annihilation(levels).adjoint(); }

inline Operator number(std::size_t levels) {
  auto b = annihilation(levels);
  return b.adjoint() * b;
}

/// Dimensionless displacement X = b + b^dagger.
inline Operator position(std::size_t levels) {
  if (levels < 2) throw InvalidInput("position: at least two levels are required");
  auto b = annihilation(levels);
  return b + b.adjoint();
}

/// Dimensionless momentum P = i (b^dagger - b).
inline Operator momentum(std::size_t levels) {
  if (levels < 2) throw InvalidInput("momentum: at least two levels are required");
  auto b = annihilation(levels);
  return Complex(0.0, 1.0) * (b.adjoint() - b);
}

/// |i><j| on a single subsystem of dimension `dim`.
inline Operator transition(std::size_t dim, std::size_t i, std::size_t j) {
  if (i >= dim || j >= dim) throw InvalidInput("transition: index out of range");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m = Matrix::Zero(n, n);
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return Operator(SpaceLayout::single(dim), std::move(m));
}

// ---------------------------------------------------------------------------
// States

/// Projector onto a (normalised here) state vector.
inline DensityMatrix pure_state(const SpaceLayout& layout, const Vector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw InvalidInput("pure_state: zero vector");
  Vector unit = psi / norm;
  return DensityMatrix(Operator(layout, unit * unit.adjoint()));
}

inline DensityMatrix basis_state(std::size_t dim, std::size_t index) {
  if (index >= dim) throw InvalidInput("basis_state: index out of range");
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(dim));
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return pure_state(SpaceLayout::single(dim), psi);
}

/// Boltzmann occupation of a truncated harmonic mode, renormalised to unit
/// trace over the kept levels.
inline DensityMatrix thermal_state(double omega, double kBT, std::size_t levels) {
  if (!(omega > 0.0) || !(kBT > 0.0)) throw InvalidInput("thermal_state: omega and kBT must be positive");
  if (levels == 0) throw InvalidInput("thermal_state: levels must be at least 1");
  const auto n = static_cast<Eigen::Index>(levels);
  const double x = omega / kBT;
  Eigen::VectorXd p(n);
  for (Eigen::Index k = 0; k < n; ++k) p(k) = std::exp(-x * static_cast<double>(k));
  p /= p.sum();
  Matrix m = Matrix::Zero(n, n);
  m.diagonal() = p.cast<Complex>();
  return DensityMatrix(Operator(SpaceLayout::single(levels), std::move(m)));
}

/// Truncated coherent state |alpha>. Throws TruncationError when the kept
/// levels carry less than `min_norm` of the untruncated weight.
inline DensityMatrix coherent_state(Complex alpha, std::size_t levels, double min_norm = 0.999) {
  if (levels == 0) throw InvalidInput("coherent_state: levels must be at least 1");
  const auto n = static_cast<Eigen::Index>(levels);
  Vector psi(n);
  Complex amp = std::exp(-0.5 * std::norm(alpha));
  for (Eigen::Index k = 0; k < n; ++k) {
    psi(k) = amp;
    amp *= alpha / std::sqrt(static_cast<double>(k + 1));
  }
  const double kept = psi.squaredNorm();
  if (kept < min_norm) {
    throw TruncationError("coherent_state: " + std::to_string(levels) + " levels keep only " + std::to_string(kept) +
                          " of the norm");
  }
  return pure_state(SpaceLayout::single(levels), psi);
}

// ---------------------------------------------------------------------------
// Reduction and measurement

namespace detail {

/// Composite-index offsets contributed by every multi-index over `subset`.
inline std::vector<Eigen::Index> subset_offsets(const SpaceLayout& layout, const std::vector<std::size_t>& subset) {
  const auto& dims = layout.dims();
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  std::vector<Eigen::Index> offsets{0};
  for (std::size_t k : subset) {
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * dims[k]);
    for (Eigen::Index base : offsets) {
      for (std::size_t i = 0; i < dims[k]; ++i) next.push_back(base + static_cast<Eigen::Index>(i * strides[k]));
    }
    offsets = std::move(next);
  }
  return offsets;
}

}  // namespace detail

/// Reduced operator on `keep` (any order; result keeps original order).
inline Operator partial_trace(const Operator& op, std::span<const std::size_t> keep) {
  const auto& layout = op.layout();
  auto kept = layout.normalized_subset(keep);
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < layout.subsystems(); ++k) {
    if (!std::binary_search(kept.begin(), kept.end(), k)) traced.push_back(k);
  }
  const auto keep_off = detail::subset_offsets(layout, kept);
  const auto trace_off = traced.empty() ? std::vector<Eigen::Index>{0} : detail::subset_offsets(layout, traced);
  const auto n = static_cast<Eigen::Index>(keep_off.size());
  const Matrix& m = op.matrix();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex acc = 0.0;
      for (Eigen::Index r : trace_off) acc += m(keep_off[i] + r, keep_off[j] + r);
      out(i, j) = acc;
    }
  }
  return Operator(layout.subset(kept), std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep,
                                   const StateTolerance& tol = {}) {
  return DensityMatrix(partial_trace(rho.op(), keep), tol);
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep,
                                   const StateTolerance& tol = {}) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()), tol);
}

/// tr(rho * obs) for a Hermitian observable.
inline double expectation(const DensityMatrix& rho, const Operator& obs, double hermiticity_tol = 1e-10) {
  if (!rho.layout().compatible(obs.layout())) throw InvalidInput("expectation: layout mismatch");
  if (!obs.is_hermitian(hermiticity_tol)) throw InvalidInput("expectation: observable is not Hermitian");
  // tr(A B) = sum_ij A_ij B_ji
  return (rho.matrix().transpose().cwiseProduct(obs.matrix())).sum().real();
}

}  // namespace qsync
