// types.hpp - shared value types: timescales with an explicit no-decay flag,
// sampled decay curves, coherence series, and the library error hierarchy.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinwave {

// Configuration / input errors (bad parameters, schema violations).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failures (norm drift, nonconvergent quadrature, tail bounds).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Fit failures (insufficient points, nonconvergence).
class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A characteristic time that may be infinite ("no decay"). Floating-point
// infinity never enters formula evaluation; callers branch on `finite`.
struct Timescale {
    bool finite = true;
    double value = 0.0; // s; meaningful only if finite

    static Timescale infinite() { return {false, 0.0}; }
    static Timescale of(double seconds) { return {true, seconds}; }

    // Returns t^2/tau^2, the usual way a timescale enters a decay law;
    // 0 when the timescale is infinite.
    double t2_over_tau2(double t) const {
        if (!finite) return 0.0;
        return (t / value) * (t / value);
    }
};

// Sampled decay curve eta(t)/eta0 (or eta(t) if an eta0 was applied).
struct DecayCurve {
    std::vector<double> times;          // s, strictly increasing
    std::vector<double> eta;            // dimensionless, >= 0
    std::vector<double> sigma_eta;      // optional; empty or same size
    std::vector<std::string> warnings;  // validity-window notes etc.
};

// Complex coherence samples with their normalization factors.
struct CoherenceSeries {
    std::vector<double> times;              // s
    std::vector<std::complex<double>> C;    // coherence C(t)
    double mu0 = 1.0;                       // mu(0)
    std::vector<double> mu_t;               // mu(t); empty means mu(t)=mu(0)

    double mu_at(std::size_t i) const { return mu_t.empty() ? mu0 : mu_t[i]; }

    // eta(t)/eta0 = |C|^2 / (mu(0) mu(t))
    double eta_over_eta0(std::size_t i) const {
        return std::norm(C[i]) / (mu0 * mu_at(i));
    }
};

} // namespace spinwave
