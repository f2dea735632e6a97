// fit.hpp - decay-curve fits (Gaussian, exponential, algebraic, stretched
// exponential) and the 1/tau^2-vs-temperature regression extracting the
// spin-wave wavelength and zero-temperature offset.
#pragma once

#include "spinwave/types.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace spinwave {

enum class DecayModel { Gaussian, Exponential, Algebraic, StretchedExponential };

std::string to_string(DecayModel m);

struct FitParam {
    double value = 0.0;
    double sigma = 0.0; // 1-sigma uncertainty, >= 0
};

struct FitResult {
    DecayModel model = DecayModel::Gaussian;
    // "tau" (s), "eta0"; StretchedExponential adds "p".
    std::map<std::string, FitParam> params;
    double residual_norm = 0.0; // sqrt(weighted SSE) in the linearized domain
    std::size_t n_points = 0;   // points used
    std::size_t n_excluded = 0; // points dropped by the eta floor

    double eval(double t) const; // fitted eta(t)
};

// Fits eta(t) to
//   Gaussian:             eta0 exp(-t^2/tau^2)     (linear in (t^2, ln eta))
//   Exponential:          eta0 exp(-t/tau)         (linear in (t,   ln eta))
//   Algebraic:            eta0 / (1 + t^2/tau^2)   (linear in (t^2, 1/eta))
//   StretchedExponential: eta0 exp(-(t/tau)^p), golden-section search on
//                         p in [0.5, 4] with an inner linear solve.
// Log-domain fits drop points with eta < floor_frac * max(eta). Uses
// sigma_eta as weights when present (sigma_ln = sigma_eta/eta). Throws
// FitError on insufficient points (>= 4; >= 5 stretched) or no resolvable
// decay.
FitResult fit_decay(const DecayCurve& curve, DecayModel model,
                    double floor_frac = 1e-4);

struct TemperatureFitResult {
    FitParam lambda_R;    // m, from the slope of 1/tau^2 vs T
    FitParam tau_offset;  // s, from the intercept; meaningful if resolved
    bool offset_resolved = false; // false when the intercept is <= 0
    double residual_norm = 0.0;
    std::size_t n_points = 0;
};

// Linear regression of 1/tau^2 on T (unweighted by default; pass 1-sigma
// tau uncertainties to weight): 1/tau^2 = (k_R^2 k_B/m) T + 1/tau_off^2.
TemperatureFitResult fit_tau_vs_temperature(
    const std::vector<std::pair<double, double>>& temperature_tau, double mass,
    const std::vector<double>& sigma_tau = {});

} // namespace spinwave
