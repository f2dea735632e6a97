// constants.hpp - physical constants (SI) used throughout the library.
#pragma once

namespace spinwave::constants {

// CODATA 2018 values.
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double k_B = 1.380649e-23;           // J/K (exact)
inline constexpr double epsilon_0 = 8.8541878128e-12; // F/m
inline constexpr double c_light = 2.99792458e8;       // m/s (exact)
inline constexpr double m_electron = 9.1093837015e-31; // kg
inline constexpr double e_charge = 1.602176634e-19;   // C (exact)

// Mass of 87Rb.
inline constexpr double m_rb87 = 1.44316e-25; // kg

// One atomic unit of dynamical polarizability.
inline constexpr double au_polarizability = 1.649e-41; // J/(V/m)^2

// Default local gravitational acceleration.
inline constexpr double g_default = 9.8; // m/s^2

inline constexpr double pi = 3.14159265358979323846;

} // namespace spinwave::constants
