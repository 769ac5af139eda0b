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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qsync/sync.hpp"

using namespace qsync;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

struct Grid {
  std::vector<double> t;
  double dt;
};

Grid grid(double t_end, double dt) {
  Grid g{{}, dt};
  const auto n = static_cast<std::size_t>(std::round(t_end / dt)) + 1;
  for (std::size_t k = 0; k < n; ++k) g.t.push_back(dt * static_cast<double>(k));
  return g;
}

template <class F>
std::vector<double> sample(const Grid& g, F f) {
  std::vector<double> v;
  for (double t : g.t) v.push_back(f(t));
  return v;
}

// The dimer mode in ps: a = 2 pi c omega, sampled at the default 0.002 ps.
const double kA = units::wavenumber_to_rate(1111.0);
const double kPeriod = 2 * kPi / kA;

std::size_t zero_crossings(const SyncSeries& s) {
  double mean = 0.0;
  for (double v : s.values) mean += v;
  mean /= static_cast<double>(s.values.size());
  std::size_t n = 0;
  for (std::size_t k = 1; k < s.values.size(); ++k) {
    if ((s.values[k - 1] - mean) * (s.values[k] - mean) < 0.0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("pearson of identical and opposite signals", "[sync]") {
  const Grid g = grid(0.2, 0.002);
  const auto f = sample(g, [](double t) { return std::exp(-t) * std::sin(kA * t) + 0.3 * t; });
  std::vector<double> neg;
  for (double v : f) neg.push_back(-v);
  const SampledSignal s1{f, g.dt}, s2{neg, g.dt};
  for (double t : {0.0, 0.013, 0.1}) {
    CHECK_THAT(pearson_window(s1, s1, t, kPeriod), WithinAbs(1.0, 1e-9));
    CHECK_THAT(pearson_window(s1, s2, t, kPeriod), WithinAbs(-1.0, 1e-9));
  }
}

TEST_CASE("pearson of phase-shifted sinusoids", "[sync]") {
  const Grid g = grid(0.1, 0.002);
  const auto f1 = sample(g, [](double t) { return std::sin(kA * t); });
  for (double phi : {0.0, kPi / 6, kPi / 4, kPi / 2, 3 * kPi / 4, kPi}) {
    const auto f2 = sample(g, [&](double t) { return std::sin(kA * t + phi); });
    const SampledSignal s1{f1, g.dt}, s2{f2, g.dt};
    for (double t : {0.0, 0.0071, 0.05}) CHECK_THAT(pearson_window(s1, s2, t, kPeriod), WithinAbs(std::cos(phi), 2e-3));
  }
}

TEST_CASE("pearson symmetry and affine invariance", "[sync]") {
  const Grid g = grid(0.2, 0.002);
  const auto f1 = sample(g, [](double t) { return std::sin(kA * t) + 0.2 * std::sin(2.3 * kA * t); });
  const auto f2 = sample(g, [](double t) { return std::cos(1.07 * kA * t) * std::exp(-3 * t); });
  std::vector<double> f1a, f2a, f2n;
  for (double v : f1) f1a.push_back(3.5 * v - 7.0);
  for (double v : f2) f2a.push_back(0.01 * v + 100.0);
  for (double v : f2) f2n.push_back(-v + 2.0);
  const SampledSignal s1{f1, g.dt}, s2{f2, g.dt}, s1a{f1a, g.dt}, s2a{f2a, g.dt}, s2n{f2n, g.dt};
  for (double t : {0.0, 0.031, 0.12}) {
    const double c = pearson_window(s1, s2, t, kPeriod);
    CHECK_THAT(pearson_window(s2, s1, t, kPeriod), WithinAbs(c, 1e-9));
    CHECK_THAT(pearson_window(s1a, s2, t, kPeriod), WithinAbs(c, 1e-9));
    CHECK_THAT(pearson_window(s1, s2a, t, kPeriod), WithinAbs(c, 1e-9));
    CHECK_THAT(pearson_window(s1, s2n, t, kPeriod), WithinAbs(-c, 1e-9));
  }
}

TEST_CASE("pearson input errors", "[sync]") {
  const Grid g = grid(0.1, 0.002);
  const auto f = sample(g, [](double t) { return std::sin(kA * t); });
  const auto c = sample(g, [](double) { return 0.4; });
  const SampledSignal s{f, g.dt}, sc{c, g.dt};
  CHECK_THROWS_AS(pearson_window(s, s, 0.08, kPeriod), InvalidInput);
  CHECK_THROWS_AS(pearson_window(s, s, -0.01, kPeriod), InvalidInput);
  CHECK_THROWS_AS(pearson_window(s, s, 0.0, 0.01), InvalidInput);  // 5 samples
  CHECK_THROWS_AS(pearson_window(s, sc, 0.0, kPeriod), DegenerateSignal);
  const std::vector<double> shorter(f.begin(), f.end() - 1);
  CHECK_THROWS_AS(pearson_window(s, SampledSignal{shorter, g.dt}, 0.0, kPeriod), InvalidInput);
}

TEST_CASE("edge interpolation against a continuous oracle", "[sync]") {
  // For linear signals the trapezoid rule is exact, so off-grid windows must
  // reproduce the continuous value 1 and the exact mean.
  const Grid g = grid(0.1, 0.002);
  const auto f1 = sample(g, [](double t) { return 2.0 * t; });
  const auto f2 = sample(g, [](double t) { return std::sin(kA * t); });
  const SampledSignal s1{f1, g.dt}, s2{f2, g.dt};
  CHECK_THAT(pearson_window(s1, s1, 0.0033, kPeriod), WithinAbs(1.0, 1e-12));
  // Fine-grid reference for corr(t, sin(a t)) on an off-grid window; the
  // quadrature error falls as dt^2.
  const Grid fine = grid(0.1, 2e-6);
  const auto g1 = sample(fine, [](double t) { return 2.0 * t; });
  const auto g2 = sample(fine, [](double t) { return std::sin(kA * t); });
  const double ref = pearson_window(SampledSignal{g1, fine.dt}, SampledSignal{g2, fine.dt}, 0.0037, kPeriod);
  const double coarse = std::abs(pearson_window(s1, s2, 0.0037, kPeriod) - ref);
  const Grid half = grid(0.1, 0.001);
  const auto h1 = sample(half, [](double t) { return 2.0 * t; });
  const auto h2 = sample(half, [](double t) { return std::sin(kA * t); });
  const double finer = std::abs(pearson_window(SampledSignal{h1, half.dt}, SampledSignal{h2, half.dt}, 0.0037, kPeriod) - ref);
  CHECK(coarse < 2e-2);
  CHECK(finer < 0.35 * coarse);
}

TEST_CASE("window length is one mode period", "[sync]") {
  CHECK_THAT(mode_period(1111.0, units::kAngularPerWavenumber), WithinAbs(1.0 / (0.0299792458 * 1111.0), 1e-15));
  CHECK_THAT(mode_period(1111.0, units::kAngularPerWavenumber), WithinAbs(0.03003, 1e-5));
  CHECK_THAT(mode_period(1.0, 1.0), WithinAbs(2 * kPi, 1e-15));
}

TEST_CASE("sync series of equal-frequency sinusoids is constant", "[sync]") {
  const Grid g = grid(1.0, 0.002);
  for (double phi : {0.0, kPi / 3, kPi}) {
    const auto f1 = sample(g, [](double t) { return std::sin(kA * t); });
    const auto f2 = sample(g, [&](double t) { return std::sin(kA * t + phi); });
    const SyncSeries s = sync_series(g.t, f1, f2, kPeriod);
    CHECK(s.times.back() <= g.t.back() - kPeriod + 1e-12);
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    CHECK(*hi - *lo < 5e-3);
    CHECK_THAT(s.values.front(), WithinAbs(std::cos(phi), 2e-3));
    for (double v : s.values) CHECK(std::abs(v) <= 1.0 + 1e-9);
    const PlateauResult p = plateau(s);
    CHECK(p.synchronised);
    REQUIRE(p.stable_value);
    CHECK_THAT(*p.stable_value, WithinAbs(std::cos(phi), 2e-3));
    REQUIRE(p.onset);
    CHECK(*p.onset == 0.0);
  }
}

TEST_CASE("detuned sinusoids do not synchronise", "[sync]") {
  const Grid g = grid(1.0, 0.002);
  const auto f1 = sample(g, [](double t) { return std::sin(kA * t); });
  const auto f2 = sample(g, [](double t) { return std::sin(1.1 * kA * t); });
  const SyncSeries s = sync_series(g.t, f1, f2, kPeriod);
  const PlateauResult p = plateau(s);
  CHECK_FALSE(p.synchronised);
  CHECK_FALSE(p.stable_value);
  CHECK_FALSE(p.onset);
  CHECK(p.tail_range > 1.0);
}

TEST_CASE("phase oscillation speeds up with detuning", "[sync]") {
  const Grid g = grid(2.0, 0.002);
  const auto f1 = sample(g, [](double t) { return std::sin(kA * t); });
  std::vector<std::size_t> crossings;
  for (double r : {1.05, 1.1, 1.2}) {
    const auto f2 = sample(g, [&](double t) { return std::sin(r * kA * t); });
    crossings.push_back(zero_crossings(sync_series(g.t, f1, f2, kPeriod)));
  }
  CHECK(crossings[0] < crossings[1]);
  CHECK(crossings[1] < crossings[2]);
  // C follows cos((r - 1) a t): two zero crossings per slip period T / (r - 1).
  const double span = 2.0 - kPeriod;
  const double ratios[] = {1.05, 1.1, 1.2};
  for (std::size_t k = 0; k < 3; ++k) {
    const double expected = 2.0 * span * (ratios[k] - 1.0) / kPeriod;
    CHECK(std::abs(static_cast<double>(crossings[k]) - expected) <= 2.0);
  }
}

TEST_CASE("decayed signals become gaps", "[sync]") {
  const Grid g = grid(0.5, 0.002);
  const auto f1 = sample(g, [](double t) { return t < 0.25 ? std::sin(kA * t) : 0.0; });
  const auto f2 = sample(g, [](double t) { return t < 0.25 ? std::cos(kA * t) : 1e-12 * std::sin(kA * t); });
  const SyncSeries s = sync_series(g.t, f1, f2, kPeriod);
  CHECK_FALSE(SyncSeries::is_gap(s.values.front()));
  CHECK(SyncSeries::is_gap(s.values.back()));
  const PlateauResult p = plateau(s);
  CHECK_FALSE(p.synchronised);
  CHECK(p.tail_points == 0);
  std::ostringstream os;
  write_sync_csv(os, s);
  CHECK(os.str().rfind("t_ps,C\n", 0) == 0);
  CHECK(os.str().find(",nan\n") != std::string::npos);
}

TEST_CASE("sync series input errors", "[sync]") {
  const Grid g = grid(0.02, 0.002);
  const auto f = sample(g, [](double t) { return std::sin(kA * t); });
  CHECK_THROWS_AS(sync_series(g.t, f, f, kPeriod), InvalidInput);
  const std::vector<double> shorter(f.begin(), f.end() - 1);
  CHECK_THROWS_AS(sync_series(g.t, f, shorter, 0.01), InvalidInput);
}

TEST_CASE("plateau on synthetic series", "[sync]") {
  SyncSeries s;
  for (int k = 0; k < 100; ++k) {
    s.times.push_back(0.1 * k);
    s.values.push_back(0.7);
  }
  PlateauResult p = plateau(s);
  CHECK(p.synchronised);
  CHECK_THAT(*p.stable_value, WithinAbs(0.7, 1e-12));

  SyncSeries c = s;
  for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] = std::cos(5 * c.times[k]);
  CHECK_FALSE(plateau(c).synchronised);

  // A slow drift is caught by the slope test even when the spread is small.
  SyncSeries d = s;
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = 0.5 + 0.02 * d.times[k];
  p = plateau(d);
  CHECK_FALSE(p.synchronised);
  CHECK_THAT(p.tail_slope, WithinAbs(0.02, 1e-12));

  // Onset: earliest time after which the series stays in the band.
  SyncSeries e = s;
  for (std::size_t k = 0; k < e.values.size(); ++k) e.values[k] = 0.9 + std::exp(-e.times[k]);
  p = plateau(e);
  REQUIRE(p.synchronised);
  REQUIRE(p.onset);
  const double c_star = *p.stable_value;
  CHECK(std::abs(0.9 + std::exp(-*p.onset) - c_star) <= 0.05);
  CHECK(std::abs(0.9 + std::exp(-(*p.onset - 0.1)) - c_star) > 0.05);

  SyncSeries tiny;
  tiny.times = {0.0, 1.0};
  tiny.values = {0.1, 0.1};
  CHECK_THROWS_AS(plateau(tiny), InvalidInput);
  CHECK_THROWS_AS(plateau(SyncSeries{}), InvalidInput);
}

TEST_CASE("plateau is stable under extension", "[sync]") {
  const Grid g = grid(1.0, 0.002);
  const Grid g2 = grid(1.2, 0.002);
  auto x1 = [](double t) { return std::sin(kA * t); };
  auto x2 = [](double t) { return std::sin(kA * t + 0.4 * std::exp(-10 * t) + 0.3); };
  const PlateauResult a = plateau(sync_series(g.t, sample(g, x1), sample(g, x2), kPeriod));
  const PlateauResult b = plateau(sync_series(g2.t, sample(g2, x1), sample(g2, x2), kPeriod));
  CHECK(a.synchronised);
  CHECK(a.synchronised == b.synchronised);
  CHECK_THAT(*a.stable_value, WithinAbs(*b.stable_value, 1e-3));
}
