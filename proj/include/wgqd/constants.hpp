#pragma once

#include <numbers>

namespace wgqd {

inline constexpr double pi = std::numbers::pi;

// SI values (2019 redefinition; mu0/eps0 are the CODATA-2018 measured values).
inline constexpr double speed_of_light = 299'792'458.0;      // m/s
inline constexpr double vacuum_permeability = 1.25663706212e-6;   // H/m
inline constexpr double vacuum_permittivity = 8.8541878128e-12;   // F/m
inline constexpr double vacuum_impedance = 376.730313668;         // ohm

}  // namespace wgqd
