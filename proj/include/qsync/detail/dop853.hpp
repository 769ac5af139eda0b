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

// Adaptive explicit Runge-Kutta 8(5,3) with 7th-order dense output.
//
// `State` is any Eigen dense type (vector or matrix, real or complex); the
// right-hand side is called as rhs(t, y, dydt) and must fill dydt.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "qsync/detail/dop853_tableau.hpp"
#include "qsync/errors.hpp"

namespace qsync::detail {

struct Dop853Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double first_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100'000'000;
};

struct Dop853Stats {
  std::size_t rhs_evaluations = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

template <class State, class Rhs>
class Dop853 {
 public:
  Dop853(Rhs rhs, double t0, State y0, Dop853Options opt = {})
      : rhs_(std::move(rhs)), opt_(opt), t_(t0), y_(std::move(y0)) {
    if (!(opt_.rtol > 0.0) || !(opt_.atol >= 0.0)) throw InvalidInput("Dop853: tolerances must be positive");
    for (auto& k : k_) k.resizeLike(y_);
    f_.resizeLike(y_);
    eval(t_, y_, f_);
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  const Dop853Stats& stats() const { return stats_; }
  double last_step() const { return t_ - t_old_; }

  /// Advance by one accepted step, never past `t_bound`.
  void step(double t_bound) {
    if (stats_.accepted + stats_.rejected >= opt_.max_steps) throw IntegrationError("Dop853: step budget exhausted");
    if (h_abs_ <= 0.0) h_abs_ = opt_.first_step > 0.0 ? opt_.first_step : initial_step(t_bound);
    const double min_step = 10.0 * std::abs(std::nextafter(t_, std::numeric_limits<double>::infinity()) - t_);
    double h_abs = std::clamp(h_abs_, min_step, opt_.max_step);
    bool rejected = false;
    for (;;) {
      if (h_abs < min_step) throw StiffnessError("Dop853: step size underflow at t = " + std::to_string(t_));
      double t_new = std::min(t_ + h_abs, t_bound);
      const double h = t_new - t_;
      h_abs = std::abs(h);
      attempt(h);
      const double err = error_norm(h);
      if (err < 1.0) {
        double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kExponent));
        if (rejected) factor = std::min(1.0, factor);
        h_abs_ = h_abs * factor;
        ++stats_.accepted;
        t_old_ = t_;
        y_old_.swap(y_);
        y_.swap(y_new_);
        f_old_.swap(f_);
        f_ = k_[kStages];  // derivative at the new point (FSAL)
        t_ = t_new;
        h_prev_ = h;
        dense_ready_ = false;
        return;
      }
      ++stats_.rejected;
      h_abs *= std::max(kMinFactor, kSafety * std::pow(err, kExponent));
      rejected = true;
    }
  }

  /// Interpolated state inside the last accepted step [t_old, t].
  State dense(double t) {
    if (stats_.accepted == 0) return y_;
    prepare_dense();
    const double x = (t - t_old_) / h_prev_;
    State y = State::Zero(y_.rows(), y_.cols());
    for (int i = 0; i < kInterpolatorPower; ++i) {
      y += dense_coef_[static_cast<std::size_t>(kInterpolatorPower - 1 - i)];
      y *= (i % 2 == 0) ? x : (1.0 - x);
    }
    y += y_old_;
    return y;
  }

 private:
  static constexpr int kStages = dop853::kStages;
  static constexpr int kStagesExtended = dop853::kStagesExtended;
  static constexpr int kInterpolatorPower = dop853::kInterpolatorPower;
  static constexpr double kSafety = 0.9;
  static constexpr double kMinFactor = 0.2;
  static constexpr double kMaxFactor = 10.0;
  static constexpr double kExponent = -1.0 / 8.0;

  void eval(double t, const State& y, State& out) {
    rhs_(t, y, out);
    ++stats_.rhs_evaluations;
  }

  void combine(int stages, const std::array<double, kStagesExtended>& a, double h, const State& y0, State& out) const {
    out = y0;
    for (int j = 0; j < stages; ++j) {
      const double c = a[static_cast<std::size_t>(j)];
      if (c != 0.0) out += (h * c) * k_[static_cast<std::size_t>(j)];
    }
  }

  void attempt(double h) {
    k_[0] = f_;
    for (int s = 1; s < kStages; ++s) {
      combine(s, dop853::A[static_cast<std::size_t>(s)], h, y_, tmp_);
      eval(t_ + dop853::C[static_cast<std::size_t>(s)] * h, tmp_, k_[static_cast<std::size_t>(s)]);
    }
    y_new_ = y_;
    for (int j = 0; j < kStages; ++j) {
      const double b = dop853::B[static_cast<std::size_t>(j)];
      if (b != 0.0) y_new_ += (h * b) * k_[static_cast<std::size_t>(j)];
    }
    eval(t_ + h, y_new_, k_[kStages]);
  }

  double error_norm(double h) {
    err5_.setZero(y_.rows(), y_.cols());
    err3_.setZero(y_.rows(), y_.cols());
    for (int j = 0; j <= kStages; ++j) {
      const double e5 = dop853::E5[static_cast<std::size_t>(j)];
      const double e3 = dop853::E3[static_cast<std::size_t>(j)];
      if (e5 != 0.0) err5_ += e5 * k_[static_cast<std::size_t>(j)];
      if (e3 != 0.0) err3_ += e3 * k_[static_cast<std::size_t>(j)];
    }
    const auto scale = (opt_.atol + opt_.rtol * y_.cwiseAbs().cwiseMax(y_new_.cwiseAbs()).array()).eval();
    const double n5 = (err5_.cwiseAbs().array() / scale).square().sum();
    const double n3 = (err3_.cwiseAbs().array() / scale).square().sum();
    if (n5 == 0.0 && n3 == 0.0) return 0.0;
    const double denom = n5 + 0.01 * n3;
    return std::abs(h) * n5 / std::sqrt(denom * static_cast<double>(y_.size()));
  }

  double initial_step(double t_bound) {
    const double span = std::abs(t_bound - t_);
    if (span == 0.0) return 0.0;
    const auto scale = (opt_.atol + opt_.rtol * y_.cwiseAbs().array()).eval();
    const double n = static_cast<double>(y_.size());
    const double d0 = std::sqrt((y_.cwiseAbs().array() / scale).square().sum() / n);
    const double d1 = std::sqrt((f_.cwiseAbs().array() / scale).square().sum() / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    tmp_ = y_ + h0 * f_;
    State f1;
    f1.resizeLike(y_);
    eval(t_ + h0, tmp_, f1);
    const double d2 = std::sqrt(((f1 - f_).cwiseAbs().array() / scale).square().sum() / n) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    return std::min({100.0 * h0, h1, span, opt_.max_step});
  }

  void prepare_dense() {
    if (dense_ready_) return;
    const double h = h_prev_;
    // The stage buffers still hold the accepted step's stages; k_[0] is f_old.
    for (int s = kStages + 1; s < kStagesExtended; ++s) {
      combine(s, dop853::A[static_cast<std::size_t>(s)], h, y_old_, tmp_);
      eval(t_old_ + dop853::C[static_cast<std::size_t>(s)] * h, tmp_, k_[static_cast<std::size_t>(s)]);
    }
    const State delta = y_ - y_old_;
    dense_coef_[0] = delta;
    dense_coef_[1] = h * f_old_ - delta;
    dense_coef_[2] = 2.0 * delta - h * (f_ + f_old_);
    for (int r = 0; r < 4; ++r) {
      State acc = State::Zero(y_.rows(), y_.cols());
      for (int j = 0; j < kStagesExtended; ++j) {
        const double d = dop853::D[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        if (d != 0.0) acc += d * k_[static_cast<std::size_t>(j)];
      }
      dense_coef_[static_cast<std::size_t>(3 + r)] = h * acc;
    }
    dense_ready_ = true;
  }

  Rhs rhs_;
  Dop853Options opt_;
  double t_;
  double t_old_ = 0.0;
  double h_prev_ = 0.0;
  double h_abs_ = 0.0;
  State y_;
  State y_old_;
  State y_new_;
  State f_;
  State f_old_;
  State tmp_;
  State err5_;
  State err3_;
  std::array<State, kStagesExtended> k_;
  std::array<State, kInterpolatorPower> dense_coef_;
  bool dense_ready_ = false;
  Dop853Stats stats_;
};

}  // namespace qsync::detail
