#pragma once

namespace cavlamb::constants {

// CODATA 2018, SI units
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m
inline constexpr double c_light = 2.99792458e8;        // m/s (exact)

inline constexpr double pi = 3.141592653589793238462643383279502884;

} // namespace cavlamb::constants
