// physical_core.hpp - species/beam/trap/ensemble parameter records and the
// scalar derived quantities of the experiment (thermal scales, geometry,
// trap optics, mixing angle).
#pragma once

#include "spinwave/types.hpp"

namespace spinwave {

struct Species {
    double mass = 0.0;                       // kg
    double ground_polarizability_1064 = 0.0; // a.u.
    double ground_polarizability_532 = 0.0;  // a.u.

    // Free-electron polarizability -e^2/(m_e omega^2) at the given trap-light
    // wavelength, in atomic units (negative). A good approximation for the
    // quasi-free Rydberg electron.
    double rydberg_polarizability(double wavelength_m) const;

    // Ground-state polarizability at a supported trap wavelength (a.u.).
    double ground_polarizability(double wavelength_m) const;

    static Species rubidium87();
};

enum class BeamArrangement { Counterpropagating, Copropagating };

struct BeamGeometry {
    double signal_wavelength = 0.0;   // m, lambda_eg
    double coupling_wavelength = 0.0; // m, lambda_re
    BeamArrangement geometry = BeamArrangement::Counterpropagating;
    double signal_waist = 0.0;        // m, w
};

struct TrapConfig {
    double radial_trap_frequency = 0.0; // rad/s, omega
    double trap_depth = 0.0;            // J, optional (0 = unset)
    double trap_beam_waist = 0.0;       // m, optional (0 = unset)
    double polarizability_ratio = 0.0;  // alpha_r/alpha_g, dimensionless
    double gravity = 9.8;               // m/s^2
};

struct ThermalEnsemble {
    double temperature = 0.0;   // K; 0 selects the BEC branch
    double atom_number = 0.0;   // dimensionless
    double medium_length = 0.0; // m
};

struct ExperimentConfig {
    Species species;
    BeamGeometry beams;
    TrapConfig trap;
    ThermalEnsemble ensemble;
};

struct DerivedScales {
    double sigma_v = 0.0;   // m/s, rms 1d thermal velocity
    double sigma_k = 0.0;   // 1/m, rms 1d thermal wavenumber
    double lambda_dB = 0.0; // m, thermal de Broglie wavelength
    double sigma_x = 0.0;   // m, in-trap rms cloud radius
    double sag = 0.0;       // m, gravitational sag g/omega^2
    double w_r = 0.0;       // m, radius of the cloud fraction put into |r>
    double kappa_g = 0.0;   // N/m, ground-state spring constant
    double kappa_r = 0.0;   // N/m, Rydberg-state spring constant
    double F = 0.0;         // N, differential force magnitude at cloud center
    double rho0 = 0.0;      // 1/m^3, peak density
    double psd = 0.0;       // dimensionless, peak phase-space density
};

// All scalar derived quantities from the experiment configuration.
// Throws ConfigError for T <= 0 or omega <= 0 (thermal in-trap branch).
DerivedScales derive_scales(const ExperimentConfig& cfg);

struct SpinWaveVector {
    double k_R = 0.0;      // 1/m; 0 for degenerate counterpropagating beams
    Timescale lambda_R;    // m stored in .value; infinite when k_R = 0
};

// Net two-photon wave vector and spin-wave wavelength.
SpinWaveVector spin_wave_wavevector(const BeamGeometry& beams);

struct TrapOptics {
    double intensity = 0.0;    // W/m^2, peak trap intensity
    double pi_rate = 0.0;      // 1/s, photoionization rate
    Timescale pi_lifetime;     // s; infinite if the cross section is zero
};

// Peak intensity from trap depth and polarizability, and the photoionization
// rate/lifetime for a given cross section and trap photon wavelength.
TrapOptics trap_optics(double depth_J, double polarizability_au,
                       double pi_cross_section_m2, double photon_wavelength_m);

// Dark-state rotation angle: tan(theta) = 2 g_R sqrt(N) / Omega_c, in [0, pi/2].
double mixing_angle(double g_R, double N, double Omega_c);

} // namespace spinwave
