#pragma once

#include <limits>

// CODATA-2018 physical constants and the unit conversions used at the
// library boundary. Everything inside the library is strict SI; the
// conversion helpers are applied exactly once when crossing the API.

namespace tdli {

namespace constants {

// SI defining constants (exact since the 2019 redefinition).
inline constexpr double planck_h  = 6.62607015e-34;       // J s
inline constexpr double speed_c   = 299792458.0;          // m/s
inline constexpr double hbar      = planck_h / 6.283185307179586476925286766559; // J s

// Measured constants.
inline constexpr double amu_kg    = 1.66053906660e-27;    // kg, CODATA 2018
inline constexpr double pi        = 3.141592653589793238462643383279;
inline constexpr double two_pi    = 2.0 * pi;

// Sentinel for "not set" optional parameters.
inline constexpr double quiet_nan = std::numeric_limits<double>::quiet_NaN();

// Average atomic masses (IUPAC 2021 standard atomic weights), amu.
inline constexpr double atomic_mass_carbon   = 12.011;
inline constexpr double atomic_mass_hydrogen = 1.008;
// Mono-isotopic masses (12C exact by definition, 1H CODATA), amu.
inline constexpr double isotope_mass_c12 = 12.0;
inline constexpr double isotope_mass_h1  = 1.00782503207;

} // namespace constants

namespace units {

inline constexpr double amu_to_kg(double amu) { return amu * constants::amu_kg; }
inline constexpr double kg_to_amu(double kg)  { return kg / constants::amu_kg; }
inline constexpr double ns_to_s(double ns)    { return ns * 1e-9; }
inline constexpr double s_to_ns(double s)     { return s * 1e9; }
inline constexpr double us_to_s(double us)    { return us * 1e-6; }
inline constexpr double s_to_us(double s)     { return s * 1e6; }
inline constexpr double mm_to_m(double mm)    { return mm * 1e-3; }
inline constexpr double m_to_mm(double m)     { return m * 1e3; }
inline constexpr double nm_to_m(double nm)    { return nm * 1e-9; }
inline constexpr double m_to_nm(double m)     { return m * 1e9; }
inline constexpr double mrad_to_rad(double mrad) { return mrad * 1e-3; }
inline constexpr double rad_to_mrad(double rad)  { return rad * 1e3; }
inline constexpr double mj_to_j(double mj)    { return mj * 1e-3; }
inline constexpr double j_to_mj(double j)     { return j * 1e3; }

} // namespace units

} // namespace tdli
