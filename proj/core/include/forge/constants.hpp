#pragma once

namespace forge::constants {

// CODATA 2018. One table shared by every module that touches SI physics.
inline constexpr double elementary_charge = 1.602176634e-19;  // C (exact)
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double pi = 3.141592653589793238462643383279502884;

// Geometry lives in micrometers; physics formulas convert at the boundary.
inline constexpr double meters_per_micron = 1e-6;
inline constexpr double per_micron_to_per_meter = 1e6;

}  // namespace forge::constants
