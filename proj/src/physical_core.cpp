// physical_core.cpp - derived scalar quantities of the stored-light experiment.
#include "spinwave/physical_core.hpp"

#include "spinwave/constants.hpp"
#include "spinwave/units.hpp"

#include <cmath>

namespace spinwave {

namespace {
constexpr double pi = constants::pi;
}

Species Species::rubidium87() {
    Species s;
    s.mass = constants::m_rb87;
    s.ground_polarizability_1064 = 687.3; // a.u.
    s.ground_polarizability_532 = -250.0; // a.u.
    return s;
}

double Species::rydberg_polarizability(double wavelength_m) const {
    if (wavelength_m <= 0.0)
        throw ConfigError("rydberg_polarizability: wavelength must be > 0");
    const double omega = 2.0 * pi * constants::c_light / wavelength_m;
    const double alpha_SI = -constants::e_charge * constants::e_charge /
                            (constants::m_electron * omega * omega);
    return units::SI_to_au_polarizability(alpha_SI);
}

double Species::ground_polarizability(double wavelength_m) const {
    const double nm = units::m_to_nm(wavelength_m);
    if (std::abs(nm - 1064.0) < 1.0) return ground_polarizability_1064;
    if (std::abs(nm - 532.0) < 1.0) return ground_polarizability_532;
    throw ConfigError("ground_polarizability: only 1064 nm and 532 nm tabulated");
}

DerivedScales derive_scales(const ExperimentConfig& cfg) {
    const double m = cfg.species.mass;
    const double T = cfg.ensemble.temperature;
    const double omega = cfg.trap.radial_trap_frequency;
    const double w = cfg.beams.signal_waist;
    if (m <= 0.0) throw ConfigError("derive_scales: mass must be > 0");
    if (T <= 0.0) throw ConfigError("derive_scales: temperature must be > 0 on thermal branches");
    if (omega <= 0.0) throw ConfigError("derive_scales: trap frequency must be > 0 for sag and sigma_x");
    if (w <= 0.0) throw ConfigError("derive_scales: signal waist must be > 0");

    DerivedScales d;
    d.sigma_v = std::sqrt(constants::k_B * T / m);
    d.sigma_k = m * d.sigma_v / constants::hbar;
    d.lambda_dB = std::sqrt(2.0 * pi) / d.sigma_k;
    d.sigma_x = d.sigma_v / omega;
    d.sag = cfg.trap.gravity / (omega * omega);
    d.w_r = 1.0 / std::sqrt(1.0 / (4.0 * d.sigma_x * d.sigma_x) + 1.0 / (w * w));

    d.kappa_g = m * omega * omega;
    d.kappa_r = d.kappa_g * cfg.trap.polarizability_ratio;
    d.F = m * cfg.trap.gravity * std::abs(1.0 - cfg.trap.polarizability_ratio);

    if (cfg.ensemble.atom_number > 0.0 && cfg.ensemble.medium_length > 0.0) {
        d.rho0 = cfg.ensemble.atom_number /
                 (2.0 * pi * d.sigma_x * d.sigma_x * cfg.ensemble.medium_length);
        d.psd = d.rho0 * d.lambda_dB * d.lambda_dB * d.lambda_dB;
    }
    return d;
}

SpinWaveVector spin_wave_wavevector(const BeamGeometry& beams) {
    if (beams.signal_wavelength <= 0.0 || beams.coupling_wavelength <= 0.0)
        throw ConfigError("spin_wave_wavevector: wavelengths must be > 0");
    const double inv_eg = 1.0 / beams.signal_wavelength;
    const double inv_re = 1.0 / beams.coupling_wavelength;
    double inv_lambda_R = 0.0;
    if (beams.geometry == BeamArrangement::Counterpropagating)
        inv_lambda_R = std::abs(inv_re - inv_eg);
    else
        inv_lambda_R = inv_re + inv_eg;

    SpinWaveVector out;
    if (inv_lambda_R == 0.0) {
        out.k_R = 0.0;
        out.lambda_R = Timescale::infinite();
    } else {
        out.k_R = 2.0 * pi * inv_lambda_R;
        out.lambda_R = Timescale::of(1.0 / inv_lambda_R);
    }
    return out;
}

TrapOptics trap_optics(double depth_J, double polarizability_au,
                       double pi_cross_section_m2, double photon_wavelength_m) {
    if (depth_J <= 0.0) throw ConfigError("trap_optics: depth must be > 0");
    if (polarizability_au <= 0.0)
        throw ConfigError("trap_optics: polarizability must be > 0");
    if (pi_cross_section_m2 < 0.0)
        throw ConfigError("trap_optics: cross section must be >= 0");
    if (photon_wavelength_m <= 0.0)
        throw ConfigError("trap_optics: wavelength must be > 0");

    TrapOptics out;
    const double alpha_SI = units::au_to_SI_polarizability(polarizability_au);
    out.intensity = 2.0 * constants::epsilon_0 * constants::c_light * depth_J / alpha_SI;
    const double omega_photon = 2.0 * pi * constants::c_light / photon_wavelength_m;
    out.pi_rate = pi_cross_section_m2 * out.intensity / (constants::hbar * omega_photon);
    if (out.pi_rate > 0.0)
        out.pi_lifetime = Timescale::of(1.0 / out.pi_rate);
    else
        out.pi_lifetime = Timescale::infinite();
    return out;
}

double mixing_angle(double g_R, double N, double Omega_c) {
    if (Omega_c < 0.0) throw ConfigError("mixing_angle: Omega_c must be >= 0");
    if (N < 0.0) throw ConfigError("mixing_angle: N must be >= 0");
    return std::atan2(2.0 * g_R * std::sqrt(N), Omega_c);
}

} // namespace spinwave
