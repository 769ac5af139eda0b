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

#include <numbers>

// Spectroscopic unit conventions: energies in wavenumbers (cm^-1), time in ps.
namespace qsync::units {

inline constexpr double kSpeedOfLightCmPerPs = 0.0299792458;

/// Angular frequency (rad/ps) carried by one wavenumber.
inline constexpr double kAngularPerWavenumber = 2.0 * std::numbers::pi * kSpeedOfLightCmPerPs;

/// Boltzmann constant in cm^-1 per kelvin.
inline constexpr double kBoltzmannWavenumberPerKelvin = 0.6950348004;

/// A rate given in ps^-1 expressed on the wavenumber scale.
constexpr double rate_to_wavenumber(double rate_per_ps) { return rate_per_ps / kAngularPerWavenumber; }

constexpr double wavenumber_to_rate(double wavenumber) { return wavenumber * kAngularPerWavenumber; }

/// Oscillation period (ps) of a mode with the given wavenumber.
constexpr double period_ps(double wavenumber) { return 1.0 / (kSpeedOfLightCmPerPs * wavenumber); }

constexpr double thermal_energy(double kelvin) { return kBoltzmannWavenumberPerKelvin * kelvin; }

}  // namespace qsync::units
