// ramsey.hpp - mapping between the storage coherence C(t), Ramsey-fringe
// visibility, and the first-order motional correlation function g1.
#pragma once

#include "spinwave/types.hpp"

#include <complex>

namespace spinwave {

struct RamseyPulse {
    // Complex amplitudes of the untransferred/transferred components after the
    // first pulse.
    std::complex<double> c_a{1.0, 0.0};
    std::complex<double> c_b{0.0, 0.0};

    // Small-area limit: c_a = 1, c_b = -i phi/2.
    static RamseyPulse small_area(std::complex<double> phi);
    // Plane-wave (unitary) pulse of complex area phi:
    // c_a = cos|phi/2|, c_b = -i (phi/|phi|) sin|phi/2|.
    static RamseyPulse plane_wave(std::complex<double> phi);
};

struct RamseySignal {
    double baseline = 0.0;   // P_{r,0} = 4 |c_a c_b|^2 C(0)
    double visibility = 0.0; // V = |C(t)/C(0)|
    double phase = 0.0;      // theta = arg C(t)
};

// P_r(t, Delta) = (baseline/2) [1 + V cos(Delta t + theta)].
RamseySignal ramsey_signal(const RamseyPulse& pulse, std::complex<double> C_t,
                           double C_0);
double ramsey_probability(const RamseySignal& s, double detuning, double t);

// |g1(r)|^2 = exp(-2 pi r^2 / lambda_dB^2) for a thermal gas.
double g1_sq_thermal(double r, double lambda_dB);

// Recoil decay as a correlation-function statement:
// eta/eta0 = |g1(v_R t)|^2 with v_R = hbar k_R / m.
double eta_from_g1(double t, double k_R, double mass, double lambda_dB);

} // namespace spinwave
