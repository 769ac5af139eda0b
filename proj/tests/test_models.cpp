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

#include "qsync/models.hpp"

using namespace qsync;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Permutation swapping the two mode factors of (2, n, n).
Matrix mode_swap(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(2 * n * n);
  Matrix p = Matrix::Zero(d, d);
  const auto nn = static_cast<Eigen::Index>(n);
  for (Eigen::Index e = 0; e < 2; ++e) {
    for (Eigen::Index a = 0; a < nn; ++a) {
      for (Eigen::Index b = 0; b < nn; ++b) p(e * nn * nn + b * nn + a, e * nn * nn + a * nn + b) = 1.0;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("units", "[models]") {
  CHECK_THAT(units::thermal_energy(298.0), WithinAbs(207.1, 0.05));
  CHECK_THAT(units::rate_to_wavenumber(1.0), WithinAbs(5.3089, 1e-4));
  CHECK_THAT(units::wavenumber_to_rate(units::rate_to_wavenumber(3.7)), WithinRel(3.7, 1e-15));
  CHECK_THAT(units::period_ps(1111.0), WithinAbs(0.03003, 1e-5));
}

TEST_CASE("reorganisation energy", "[models]") {
  CHECK(reorganisation_energy(1111.0, 0.0) == 0.0);
  const double s = (267.1 / 1111.0) * (267.1 / 1111.0);
  CHECK_THAT(s, WithinAbs(0.05779, 1e-5));
  CHECK_THAT(reorganisation_energy(1111.0, s), WithinAbs(1111.0 * s, 1e-12));
  CHECK_THAT(reorganisation_energy(1111.0, s), WithinAbs(64.2, 0.05));
  CHECK_THAT(reorganisation_energy(1111.0, 2 * s), WithinRel(2 * reorganisation_energy(1111.0, s), 1e-15));
  CHECK_THROWS_AS(reorganisation_energy(0.0, s), InvalidInput);
  CHECK_THROWS_AS(reorganisation_energy(1111.0, -1.0), InvalidInput);
}

TEST_CASE("default dimer parameters", "[models]") {
  const DimerParams p = DimerParams::pe545();
  CHECK(p.gap() == 1042.0);
  CHECK(p.V == 92.0);
  CHECK_THAT(p.coupling1(), WithinAbs(267.1, 1e-9));
  CHECK_THAT(p.coupling2(), WithinAbs(267.1, 1e-9));
  CHECK(p.kBT == 207.1);
  CHECK(p.gamma_th == 1.0);
  CHECK(p.gamma_deph == 10.0);
  CHECK(p.levels == 9);
  CHECK(std::round(p.eta() * 100.0) / 100.0 == 0.18);
  CHECK_THAT(p.eta(), WithinAbs(2.0 * 92.0 / 1042.0, 1e-15));
  CHECK_THAT(DimerParams::pe545_eta05().eta(), WithinAbs(0.5, 1e-12));
}

TEST_CASE("detuning changes only the second mode", "[models]") {
  const DimerParams p = DimerParams::pe545();
  const DimerParams hs = p.detuned(1.02);
  CHECK_THAT(hs.omega2, WithinRel(1.02 * 1111.0, 1e-15));
  CHECK(hs.omega1 == p.omega1);
  CHECK(hs.S2 == p.S2);
  CHECK_THAT(hs.lambda2(), WithinRel(1.02 * p.lambda2(), 1e-14));
  const DimerParams hg = p.detuned(1.02, DetuningHold::kCoupling);
  CHECK_THAT(hg.coupling2(), WithinRel(267.1, 1e-14));
  CHECK_THROWS_AS(p.detuned(0.0), InvalidInput);
}

TEST_CASE("mixing angle", "[models]") {
  DimerParams p = DimerParams::pe545();
  CHECK_THAT(mixing_angle(p), WithinAbs(0.5 * std::atan(184.0 / 1042.0), 1e-12));
  CHECK_THAT(mixing_angle(p), WithinAbs(0.0874, 1e-4));
  p.V = 0.0;
  CHECK(mixing_angle(p) == 0.0);
  p = DimerParams::pe545();
  p.e2 = p.e1;
  CHECK(mixing_angle(p) == std::numbers::pi / 4);
}

TEST_CASE("exciton energies and vectors", "[models]") {
  const DimerModel m = dimer_hamiltonian(DimerParams::pe545());
  CHECK_THAT(m.E2 - m.E1, WithinAbs(std::sqrt(1042.0 * 1042.0 + 4 * 92.0 * 92.0), 1e-9));
  CHECK_THAT(m.E2 - m.E1, WithinAbs(1058.1, 0.05));
  // Columns of U diagonalise the site Hamiltonian with the shifted energies.
  const auto& p = m.params;
  Eigen::Matrix2d hs;
  hs << p.e1 + p.lambda1(), p.V, p.V, p.e2 + p.lambda2();
  Eigen::Matrix2d u;
  u.col(0) = m.excitons[0];
  u.col(1) = m.excitons[1];
  CHECK((u.transpose() * u - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::Matrix2d d = u.transpose() * hs * u;
  CHECK_THAT(d(0, 0), WithinAbs(m.E1, 1e-9));
  CHECK_THAT(d(1, 1), WithinAbs(m.E2, 1e-9));
  CHECK(std::abs(d(0, 1)) < 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hs);
  CHECK_THAT(es.eigenvalues()(0), WithinAbs(m.E1, 1e-9));
  CHECK_THAT(es.eigenvalues()(1), WithinAbs(m.E2, 1e-9));
}

TEST_CASE("exciton vectors follow the sign of V and of the gap", "[models]") {
  for (double v : {92.0, -92.0}) {
    for (double e2 : {1042.0, -1042.0}) {
      DimerParams p = DimerParams::pe545();
      p.V = v;
      p.e2 = e2;
      const DimerModel m = dimer_hamiltonian(p);
      Eigen::Matrix2d hs;
      hs << p.e1 + p.lambda1(), p.V, p.V, p.e2 + p.lambda2();
      CHECK_THAT(m.excitons[0].dot(hs * m.excitons[0]), WithinAbs(m.E1, 1e-9));
      CHECK_THAT(m.excitons[1].dot(hs * m.excitons[1]), WithinAbs(m.E2, 1e-9));
    }
  }
}

TEST_CASE("dimer Hamiltonian is Hermitian", "[models]") {
  CHECK(dimer_hamiltonian(DimerParams::pe545()).hamiltonian.hermiticity_error() <= 1e-10);
  CHECK(dimer_hamiltonian(DimerParams::pe545().detuned(1.02)).hamiltonian.hermiticity_error() <= 1e-10);
  CHECK(dimer_hamiltonian(DimerParams::pe545_eta05()).hamiltonian.hermiticity_error() <= 1e-10);
}

TEST_CASE("uncoupled dimer spectrum", "[models]") {
  DimerParams p = DimerParams::pe545().detuned(1.1);
  p.S1 = p.S2 = 0.0;
  p.levels = 4;
  const DimerModel m = dimer_hamiltonian(p);
  std::vector<double> expected;
  for (double e : {m.E1, m.E2}) {
    for (int n1 = 0; n1 < 4; ++n1) {
      for (int n2 = 0; n2 < 4; ++n2) expected.push_back(e + n1 * p.omega1 + n2 * p.omega2);
    }
  }
  std::sort(expected.begin(), expected.end());
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.hamiltonian.matrix());
  for (std::size_t k = 0; k < expected.size(); ++k) CHECK_THAT(es.eigenvalues()(k), WithinAbs(expected[k], 1e-9));
  CHECK(max_abs(m.hamiltonian.matrix() - m.hamiltonian.matrix().diagonal().asDiagonal().toDenseMatrix()) == 0.0);
}

TEST_CASE("electronic block has the exciton energies", "[models]") {
  DimerParams p = DimerParams::pe545();
  p.S1 = p.S2 = 0.0;
  const DimerModel m = dimer_hamiltonian(p);
  // The vacuum-vacuum block is the purely electronic Hamiltonian.
  const Eigen::Index stride = static_cast<Eigen::Index>(p.levels * p.levels);
  CHECK_THAT(m.hamiltonian.matrix()(0, 0).real(), WithinAbs(m.E1, 1e-9));
  CHECK_THAT(m.hamiltonian.matrix()(stride, stride).real(), WithinAbs(m.E2, 1e-9));
  CHECK(std::abs(m.hamiltonian.matrix()(0, stride)) < 1e-12);
}

// For equal modes, g (T1 X1 + T2 X2) with T_i the site projectors equals
// (g/2)(X1 + X2) - (g/2)(cos 2t sz + sin 2t sx)(X2 - X1), sz = |E1><E1| - |E2><E2|.
TEST_CASE("equal-mode interaction in Pauli form", "[models]") {
  DimerParams p = DimerParams::pe545();
  p.levels = 5;
  const DimerModel m = dimer_hamiltonian(p);
  const auto& layout = m.layout;
  const double g = p.coupling1();
  const double th = m.theta;
  Eigen::Matrix2d sz, sx;
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  const Operator pauli = detail::electronic(layout, std::cos(2 * th) * sz + std::sin(2 * th) * sx);
  const Operator x1 = m.position(1), x2 = m.position(2);
  const Operator form = (0.5 * g) * (x1 + x2) - (0.5 * g) * (pauli * (x2 - x1));

  Eigen::Matrix2d el = Eigen::Matrix2d::Zero();
  el(0, 0) = m.E1;
  el(1, 1) = m.E2;
  const Operator free = detail::electronic(layout, el) + p.omega1 * embed(number(p.levels), layout, 1) +
                        p.omega2 * embed(number(p.levels), layout, 2);
  const Matrix interaction = (m.hamiltonian - free).matrix();
  CHECK(max_abs(interaction - form.matrix()) < 1e-9);
}

TEST_CASE("dimer channels", "[models]") {
  const DimerParams p = DimerParams::pe545();
  const DimerModel m = dimer_hamiltonian(p);
  const auto ch = dimer_channels(p, m);
  REQUIRE(ch.size() == 6);
  const double B = 1.0 / (std::exp(1111.0 / 207.1) - 1.0);
  CHECK_THAT(bose_occupation(1111.0, 207.1), WithinAbs(B, 1e-15));
  CHECK_THAT(B, WithinAbs(0.00470, 1e-5));
  const double th = units::rate_to_wavenumber(1.0);
  CHECK_THAT(ch[0].rate, WithinRel(units::rate_to_wavenumber(10.0), 1e-15));
  CHECK_THAT(ch[2].rate, WithinRel(th * (1.0 + B), 1e-15));
  CHECK_THAT(ch[3].rate, WithinRel(th * B, 1e-15));
  // Dephasing projectors are the site projectors: they sum to the identity
  // and are not diagonal in the exciton basis.
  CHECK(max_abs((ch[0].op + ch[1].op).matrix() - Matrix::Identity(162, 162)) < 1e-14);
  CHECK(std::abs(ch[0].op.matrix()(0, 81)) > 0.05);
  for (const auto& c : ch) CHECK(c.rate >= 0.0);

  DimerParams cold = p;
  cold.kBT = 1e-3;
  const auto cc = dimer_channels(cold);
  CHECK(cc[3].rate == 0.0);
  CHECK(cc[5].rate == 0.0);

  const auto det = dimer_channels(p.detuned(1.2));
  CHECK_THAT(det[5].rate, WithinRel(th * bose_occupation(1.2 * 1111.0, 207.1), 1e-14));
}

TEST_CASE("mode exchange combined with site exchange is a symmetry", "[models]") {
  // Degenerate sites: swapping sites and modes together leaves H invariant.
  DimerParams p = DimerParams::pe545();
  p.e2 = p.e1;
  p.levels = 4;
  const DimerModel m = dimer_hamiltonian(p);
  const Matrix swap_modes = mode_swap(p.levels);
  // Site exchange written in the exciton basis.
  Eigen::Matrix2d u, f;
  u.col(0) = m.excitons[0];
  u.col(1) = m.excitons[1];
  f << 0, 1, 1, 0;
  const Operator site_swap = detail::electronic(m.layout, u.transpose() * f * u);
  const Matrix s = site_swap.matrix() * swap_modes;
  CHECK(max_abs(s * s - Matrix::Identity(s.rows(), s.cols())) < 1e-12);
  CHECK(max_abs(s * m.hamiltonian.matrix() * s.adjoint() - m.hamiltonian.matrix()) < 1e-9);
}

TEST_CASE("swapping modes alone is not a symmetry of the asymmetric dimer", "[models]") {
  DimerParams p = DimerParams::pe545();
  p.levels = 4;
  const DimerModel m = dimer_hamiltonian(p);
  const Matrix sw = mode_swap(p.levels);
  // Each mode couples to a different site, so the swap moves the coupling.
  CHECK(max_abs(sw * m.hamiltonian.matrix() * sw - m.hamiltonian.matrix()) > 10.0);
}

TEST_CASE("militello defaults and validation", "[models]") {
  const MilitelloParams p = MilitelloParams::defaults();
  CHECK(p.e2 - p.e1 == 1.0);
  CHECK(p.omega1 == 1.0);
  CHECK(p.g1 == 1.0);
  CHECK(p.gamma_minus == 0.2);
  MilitelloParams bad = p;
  bad.phi1 = 4.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.phi1 = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("militello interaction forms", "[models]") {
  MilitelloParams p = MilitelloParams::defaults();
  p.levels = 6;
  const auto layout = detail::two_mode_layout(p.levels);
  Eigen::Matrix2d sxm;
  sxm << 0, 1, 1, 0;
  const Operator sx = detail::electronic(layout, sxm);
  const Operator x1 = embed(position(p.levels), layout, 1);
  const Operator x2 = embed(position(p.levels), layout, 2);
  const Operator p1 = embed(momentum(p.levels), layout, 1);
  Eigen::Matrix2d el = Eigen::Matrix2d::Zero();
  el(1, 1) = 1.0;
  const Operator free = detail::electronic(layout, el) + embed(number(p.levels), layout, 1) + embed(number(p.levels), layout, 2);
  auto interaction = [&](double phi1) {
    MilitelloParams q = p;
    q.phi1 = phi1;
    const Operator h = militello_hamiltonian(q);
    CHECK(h.hermiticity_error() <= 1e-10);
    return (h - free).matrix();
  };
  CHECK(max_abs(interaction(0.0) - (sx * (x1 + x2)).matrix()) < 1e-12);
  CHECK(max_abs(interaction(std::numbers::pi) - (sx * (x2 - x1)).matrix()) < 1e-12);
  // e^{i pi/2} b + e^{-i pi/2} b^+ = i (b - b^+) = -P with P = i (b^+ - b).
  CHECK(max_abs(interaction(std::numbers::pi / 2) - (sx * (x2 - p1)).matrix()) < 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(max_abs(interaction(std::numbers::pi / 4) - (sx * (x2 + r * x1 - r * p1)).matrix()) < 1e-12);
  CHECK(max_abs(interaction(3 * std::numbers::pi / 4) - (sx * (x2 - r * x1 - r * p1)).matrix()) < 1e-12);
}

TEST_CASE("militello channel", "[models]") {
  const MilitelloParams p = MilitelloParams::defaults();
  const auto ch = militello_channels(p);
  REQUIRE(ch.size() == 1);
  CHECK(ch[0].rate == 0.2);
  // sigma_- annihilates the lower level |e1> (x) anything.
  const Matrix& op = ch[0].op.matrix();
  const Eigen::Index half = op.cols() / 2;
  CHECK(op.leftCols(half).cwiseAbs().maxCoeff() == 0.0);
  CHECK(op.rightCols(half).cwiseAbs().maxCoeff() == 1.0);
}
