// units.hpp - conversions between SI (internal) and the CLI boundary units
// (uK, us, um, nm, Hz, mW, atomic units).
#pragma once

#include "spinwave/constants.hpp"

namespace spinwave::units {

inline constexpr double uK_to_K(double v) { return v * 1e-6; }
inline constexpr double K_to_uK(double v) { return v * 1e6; }

inline constexpr double us_to_s(double v) { return v * 1e-6; }
inline constexpr double s_to_us(double v) { return v * 1e6; }

inline constexpr double um_to_m(double v) { return v * 1e-6; }
inline constexpr double m_to_um(double v) { return v * 1e6; }

inline constexpr double nm_to_m(double v) { return v * 1e-9; }
inline constexpr double m_to_nm(double v) { return v * 1e9; }

inline constexpr double mm_to_m(double v) { return v * 1e-3; }

inline constexpr double mW_to_W(double v) { return v * 1e-3; }

// Trap frequency: Hz (nu) <-> rad/s (omega).
inline constexpr double Hz_to_rad_s(double v) { return 2.0 * constants::pi * v; }
inline constexpr double rad_s_to_Hz(double v) { return v / (2.0 * constants::pi); }

// Polarizability: atomic units <-> SI [J/(V/m)^2].
inline constexpr double au_to_SI_polarizability(double v) {
    return v * constants::au_polarizability;
}
inline constexpr double SI_to_au_polarizability(double v) {
    return v / constants::au_polarizability;
}

} // namespace spinwave::units
