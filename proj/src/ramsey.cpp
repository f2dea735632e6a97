// ramsey.cpp
#include "spinwave/ramsey.hpp"

#include "spinwave/constants.hpp"

#include <cmath>

namespace spinwave {

RamseyPulse RamseyPulse::small_area(std::complex<double> phi) {
    RamseyPulse p;
    p.c_a = {1.0, 0.0};
    p.c_b = std::complex<double>(0.0, -0.5) * phi;
    return p;
}

RamseyPulse RamseyPulse::plane_wave(std::complex<double> phi) {
    RamseyPulse p;
    const double half = 0.5 * std::abs(phi);
    p.c_a = {std::cos(half), 0.0};
    if (std::abs(phi) == 0.0) {
        p.c_b = {0.0, 0.0};
    } else {
        p.c_b = std::complex<double>(0.0, -1.0) * (phi / std::abs(phi)) * std::sin(half);
    }
    return p;
}

RamseySignal ramsey_signal(const RamseyPulse& pulse, std::complex<double> C_t,
                           double C_0) {
    if (C_0 <= 0.0) throw ConfigError("ramsey_signal: C(0) must be > 0");
    RamseySignal s;
    s.baseline = 4.0 * std::norm(pulse.c_a * pulse.c_b) * C_0;
    s.visibility = std::abs(C_t) / C_0;
    s.phase = std::arg(C_t);
    return s;
}

double ramsey_probability(const RamseySignal& s, double detuning, double t) {
    return 0.5 * s.baseline * (1.0 + s.visibility * std::cos(detuning * t + s.phase));
}

double g1_sq_thermal(double r, double lambda_dB) {
    if (lambda_dB <= 0.0) throw ConfigError("g1_sq_thermal: lambda_dB must be > 0");
    return std::exp(-2.0 * constants::pi * r * r / (lambda_dB * lambda_dB));
}

double eta_from_g1(double t, double k_R, double mass, double lambda_dB) {
    if (mass <= 0.0) throw ConfigError("eta_from_g1: mass must be > 0");
    const double v_R = constants::hbar * k_R / mass;
    return g1_sq_thermal(v_R * t, lambda_dB);
}

} // namespace spinwave
