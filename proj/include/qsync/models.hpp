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

// Hamiltonians and dissipation channels for the exciton-vibration dimer and
// the two-mode Jaynes-Cummings (Militello) model.
//
// Both models live on the layout (electronic: 2, mode1: levels, mode2: levels).

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsync/hilbert.hpp"
#include "qsync/units.hpp"

namespace qsync {

/// Lindblad jump operator O with rate Gamma, the rate expressed on the same
/// energy scale as the Hamiltonian it accompanies.
struct LindbladChannel {
  Operator op;
  double rate = 0.0;
  std::string label;
};

/// A Hamiltonian, its dissipators, and the angular frequency per energy unit
/// that converts the generator into the trajectory's time unit.
struct OpenSystem {
  Operator hamiltonian;
  std::vector<LindbladChannel> channels;
  double time_scale = 1.0;
};

/// How the second mode's coupling follows a detuning of omega2.
enum class DetuningHold {
  kHuangRhys,  // S2 fixed, so lambda2 = omega2 S2 and g2 = omega2 sqrt(S2) move with omega2
  kCoupling,   // g2 fixed, S2 = (g2 / omega2)^2
};

inline constexpr double reorganisation_energy(double omega, double huang_rhys) {
  if (!(omega > 0.0) || huang_rhys < 0.0) throw InvalidInput("reorganisation_energy: need omega > 0 and S >= 0");
  return omega * huang_rhys;
}

inline double huang_rhys_from_coupling(double g, double omega) { return (g / omega) * (g / omega); }

/// Bose occupation (e^{omega/kBT} - 1)^{-1}; zero at kBT = 0.
inline double bose_occupation(double omega, double kBT) {
  if (kBT <= 0.0) return 0.0;
  return 1.0 / std::expm1(omega / kBT);
}

struct DimerParams {
  double e1 = 0.0;     // cm^-1
  double e2 = 1042.0;  // cm^-1
  double V = 92.0;     // cm^-1
  double omega1 = 1111.0;
  double omega2 = 1111.0;
  double S1 = huang_rhys_from_coupling(267.1, 1111.0);
  double S2 = huang_rhys_from_coupling(267.1, 1111.0);
  double gamma_deph = 10.0;  // ps^-1
  double gamma_th = 1.0;     // ps^-1
  double kBT = 207.1;        // cm^-1
  std::size_t levels = 9;

  /// Central dimer of the PE545 antenna.
  static DimerParams pe545() { return {}; }

  /// Same as pe545 but with V raised to give 2V/|de| = 0.5 at de = 1042.
  static DimerParams pe545_eta05() {
    DimerParams p;
    p.V = 0.25 * (p.e2 - p.e1);
    return p;
  }

  double coupling1() const { return omega1 * std::sqrt(S1); }
  double coupling2() const { return omega2 * std::sqrt(S2); }
  double lambda1() const { return reorganisation_energy(omega1, S1); }
  double lambda2() const { return reorganisation_energy(omega2, S2); }

  /// Bare site-energy gap e2 - e1.
  double gap() const { return e2 - e1; }

  /// Site-energy gap including reorganisation shifts.
  double shifted_gap() const { return (e2 + lambda2()) - (e1 + lambda1()); }

  /// Excitonic delocalisation 2V / |e2 - e1|.
  double eta() const { return 2.0 * V / std::abs(gap()); }

  /// Detune the pair by setting omega2 = ratio * omega1.
  DimerParams detuned(double ratio, DetuningHold hold = DetuningHold::kHuangRhys) const {
    if (!(ratio > 0.0)) throw InvalidInput("detuned: ratio must be positive");
    DimerParams p = *this;
    const double g2 = coupling2();
    p.omega2 = ratio * omega1;
    if (hold == DetuningHold::kCoupling) p.S2 = huang_rhys_from_coupling(g2, p.omega2);
    return p;
  }

  void validate() const {
    if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw InvalidInput("DimerParams: mode energies must be positive");
    if (S1 < 0.0 || S2 < 0.0) throw InvalidInput("DimerParams: Huang-Rhys factors must be non-negative");
    if (gamma_deph < 0.0 || gamma_th < 0.0) throw InvalidInput("DimerParams: rates must be non-negative");
    if (kBT < 0.0) throw InvalidInput("DimerParams: kBT must be non-negative");
    if (levels < 2) throw InvalidInput("DimerParams: at least two Fock levels per mode");
  }
};

/// Mixing angle 1/2 atan(2|V| / de(omega1, omega2)); pi/4 for degenerate sites.
inline double mixing_angle(const DimerParams& p) {
  const double de = p.shifted_gap();
  if (de == 0.0) return std::numbers::pi / 4.0;
  return 0.5 * std::atan(2.0 * std::abs(p.V) / de);
}

/// Dimer Hamiltonian in the (exciton, mode1, mode2) basis plus the exciton
/// metadata needed to map back to sites.
struct DimerModel {
  DimerParams params;
  Operator hamiltonian;
  double theta = 0.0;
  double E1 = 0.0;  // lower exciton
  double E2 = 0.0;  // upper exciton
  /// Site-basis components of |E1> (index 0) and |E2> (index 1).
  std::array<Eigen::Vector2d, 2> excitons;
  SpaceLayout layout;

  /// Site projector |e_i><e_i| (i = 0, 1) written in the exciton basis.
  Eigen::Matrix2d site_projector(int site) const {
    Eigen::Matrix2d m;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) m(a, b) = excitons[a](site) * excitons[b](site);
    }
    return m;
  }

  Operator position(int mode) const { return embed(qsync::position(params.levels), layout, mode); }
  Operator exciton_population(int exciton) const { return embed(transition(2, exciton, exciton), layout, 0); }
};

namespace detail {

inline SpaceLayout two_mode_layout(std::size_t levels) {
  return SpaceLayout({2, levels, levels}, {"electronic", "mode1", "mode2"});
}

inline Operator electronic(const SpaceLayout& layout, const Eigen::Matrix2d& m) {
  return embed(Operator(SpaceLayout::single(2), m.cast<Complex>()), layout, 0);
}

}  // namespace detail

inline DimerModel dimer_hamiltonian(const DimerParams& p) {
  p.validate();
  DimerModel model;
  model.params = p;
  model.layout = detail::two_mode_layout(p.levels);
  model.theta = mixing_angle(p);

  const double eps1 = p.e1 + p.lambda1();
  const double eps2 = p.e2 + p.lambda2();
  const double split = std::sqrt(p.shifted_gap() * p.shifted_gap() + 4.0 * p.V * p.V);
  model.E1 = 0.5 * (eps1 + eps2 - split);
  model.E2 = 0.5 * (eps1 + eps2 + split);

  // Eigenvectors of [[eps1, V], [V, eps2]]. With tan(2 theta) = 2|V| / de the
  // lower state is (c, -s sgn V) when de > 0; for de < 0 the roles swap.
  const double c = std::cos(model.theta);
  const double s = std::sin(model.theta);
  const double sv = p.V < 0.0 ? -1.0 : 1.0;
  Eigen::Vector2d lower(c, -s * sv);
  Eigen::Vector2d upper(s * sv, c);
  if (p.shifted_gap() < 0.0) std::swap(lower, upper);
  model.excitons = {lower, upper};

  const auto& layout = model.layout;
  Eigen::Matrix2d exc = Eigen::Matrix2d::Zero();
  exc(0, 0) = model.E1;
  exc(1, 1) = model.E2;
  Operator h = detail::electronic(layout, exc);
  h += p.omega1 * embed(number(p.levels), layout, 1);
  h += p.omega2 * embed(number(p.levels), layout, 2);
  h += p.coupling1() * (detail::electronic(layout, model.site_projector(0)) * model.position(1));
  h += p.coupling2() * (detail::electronic(layout, model.site_projector(1)) * model.position(2));
  model.hamiltonian = std::move(h);
  return model;
}

/// Local pure dephasing on each site plus thermal relaxation of each mode.
/// Rates are converted from ps^-1 to cm^-1.
inline std::vector<LindbladChannel> dimer_channels(const DimerParams& p, const DimerModel& model) {
  const auto& layout = model.layout;
  const double deph = units::rate_to_wavenumber(p.gamma_deph);
  const double th = units::rate_to_wavenumber(p.gamma_th);
  const double B1 = bose_occupation(p.omega1, p.kBT);
  const double B2 = bose_occupation(p.omega2, p.kBT);
  const Operator b1 = embed(annihilation(p.levels), layout, 1);
  const Operator b2 = embed(annihilation(p.levels), layout, 2);
  return {
      {detail::electronic(layout, model.site_projector(0)), deph, "dephasing_site1"},
      {detail::electronic(layout, model.site_projector(1)), deph, "dephasing_site2"},
      {b1, th * (1.0 + B1), "relax_mode1"},
      {b1.adjoint(), th * B1, "excite_mode1"},
      {b2, th * (1.0 + B2), "relax_mode2"},
      {b2.adjoint(), th * B2, "excite_mode2"},
  };
}

inline std::vector<LindbladChannel> dimer_channels(const DimerParams& p) { return dimer_channels(p, dimer_hamiltonian(p)); }

inline OpenSystem dimer_system(const DimerModel& model) {
  return {model.hamiltonian, dimer_channels(model.params, model), units::kAngularPerWavenumber};
}

// ---------------------------------------------------------------------------

/// Two-level system coupled to two oscillators through sigma_x with
/// interaction phases phi1, phi2. Dimensionless units with e2 - e1 = 1.
struct MilitelloParams {
  double e1 = 0.0;
  double e2 = 1.0;
  double omega1 = 1.0;
  double omega2 = 1.0;
  double g1 = 1.0;
  double g2 = 1.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double gamma_minus = 0.2;
  std::size_t levels = 12;

  static MilitelloParams defaults() { return {}; }

  MilitelloParams detuned(double ratio) const {
    if (!(ratio > 0.0)) throw InvalidInput("detuned: ratio must be positive");
    MilitelloParams p = *this;
    p.omega2 = ratio * omega1;
    return p;
  }

  void validate() const {
    constexpr double pi = std::numbers::pi;
    if (phi1 < 0.0 || phi1 > pi + 1e-12 || phi2 < 0.0 || phi2 > pi + 1e-12) {
      throw InvalidInput("MilitelloParams: phases must lie in [0, pi]");
    }
    if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw InvalidInput("MilitelloParams: mode energies must be positive");
    if (gamma_minus < 0.0) throw InvalidInput("MilitelloParams: rate must be non-negative");
    if (levels < 2) throw InvalidInput("MilitelloParams: at least two Fock levels per mode");
  }
};

/// g (e^{i phi} b + e^{-i phi} b^dagger) on one mode, lifted to the layout.
inline Operator phased_quadrature(const SpaceLayout& layout, std::size_t levels, int mode, double phi) {
  const Operator b = embed(annihilation(levels), layout, mode);
  const Complex ph = std::polar(1.0, phi);
  return ph * b + std::conj(ph) * b.adjoint();
}

inline Operator militello_hamiltonian(const MilitelloParams& p) {
  p.validate();
  const auto layout = detail::two_mode_layout(p.levels);
  Eigen::Matrix2d el = Eigen::Matrix2d::Zero();
  el(0, 0) = p.e1;
  el(1, 1) = p.e2;
  Eigen::Matrix2d sx;
  sx << 0, 1, 1, 0;
  const Operator sigma_x = detail::electronic(layout, sx);
  Operator h = detail::electronic(layout, el);
  h += p.omega1 * embed(number(p.levels), layout, 1);
  h += p.omega2 * embed(number(p.levels), layout, 2);
  h += p.g1 * (phased_quadrature(layout, p.levels, 1, p.phi1) * sigma_x);
  h += p.g2 * (phased_quadrature(layout, p.levels, 2, p.phi2) * sigma_x);
  return h;
}

/// Single decay channel sigma_- = |e1><e2| on the two-level system.
inline std::vector<LindbladChannel> militello_channels(const MilitelloParams& p) {
  p.validate();
  const auto layout = detail::two_mode_layout(p.levels);
  return {{embed(transition(2, 0, 1), layout, 0), p.gamma_minus, "sigma_minus"}};
}

inline OpenSystem militello_system(const MilitelloParams& p) {
  return {militello_hamiltonian(p), militello_channels(p), 1.0};
}

}  // namespace qsync
