// coherence_models.hpp - closed-form dark-time decay laws eta(t)/eta0 for all
// modeled mechanisms, plus composition rules (Cartesian product and mixture).
#pragma once

#include "spinwave/physical_core.hpp"
#include "spinwave/types.hpp"

#include <array>
#include <complex>
#include <functional>

namespace spinwave {

// --- Photon recoil + thermal motion: Gaussian decay -------------------------

// tau_R = 1/(k_R sigma_v); infinite (no decay) when k_R sigma_v = 0.
Timescale recoil_tau(double k_R, double sigma_v);

// Equivalent form tau_R = lambda_dB / (v_R sqrt(2 pi)).
Timescale recoil_tau_from_lambda(double lambda_dB, double v_R);

// eta/eta0 = exp(-t^2/tau_R^2).
double eta_recoil(double t, double k_R, double sigma_v);

// --- Harmonic differential potential with gravitational sag -----------------

struct HarmonicTrapTimescales {
    Timescale tau_F;     // 2 hbar / (w_r |F|)
    Timescale tau_kappa; // 4 hbar / (w_r^2 |kappa_g - kappa_r|)
};

HarmonicTrapTimescales harmonic_trap_timescales(const DerivedScales& scales);

// eta/eta0 = |zeta1|^-2 exp(-(t^2/tau_F^2)/|zeta1|^2), |zeta1|^2 = 1 + t^2/tau_kappa^2.
double eta_harmonic_sag(double t, Timescale tau_F, Timescale tau_kappa);

// Dark times beyond this violate the frozen-position approximation used to
// derive eta_harmonic_sag: t << 2 pi sqrt(m/|kappa_r - kappa_g|).
Timescale harmonic_validity_time(double mass, double kappa_g, double kappa_r);

// --- Exact solution for a linear differential potential ----------------------

struct LinearForceParams {
    double w = 0.0;        // m, signal beam waist
    double sigma_v = 0.0;  // m/s, thermal velocity spread
    double mass = 0.0;     // kg
    std::array<double, 3> k_R = {0.0, 0.0, 0.0}; // 1/m; z is the beam axis
    double F_x = 0.0;      // N, force along x (F_y rotated away, F_z must be 0)
};

// Exact eta/eta0 for a homogeneous cloud in a linear differential potential
// with finite beam waist, recoil, and temperature.
double eta_linear_force_exact(double t, const LinearForceParams& p);

// Documented limits of the exact solution.
Timescale linear_force_tau_F_infty(double w, double F); // 2 hbar/(w|F|), sigma_v=0 limit
Timescale linear_force_tau_w(double mass, double w);    // m w^2/hbar
double eta_tau_w_limit(double t, double mass, double w);            // 1/(1+t^2/tau_w^2)
double eta_thermal_beam_escape(double t, double sigma_v, double w); // 1/(1+sigma_v^2 t^2/w^2)^2
// F=0 transverse/longitudinal-recoil case at w sigma_k >> 1.
double eta_jenkins(double t, double w, double sigma_v, double mass,
                   const std::array<double, 3>& k_R);

// --- Markovian dephasing / population decay ----------------------------------

// eta/eta0 = exp(-gamma_rg t); identical for the dephasing and
// population-decay channels after thermal averaging.
double eta_exponential(double t, double gamma_rg);

// --- Free expansion -----------------------------------------------------------

// Exact 1d result for a condensate released from a harmonic trap.
double eta_release_bec(double t, double a0, double w, double omega);
Timescale release_bec_tau_a(double mass, double a0, double w); // m a0 w / hbar
double eta_release_bec_narrow(double t, Timescale tau_a);      // a0 << w limit
double eta_release_bec_wide(double t, Timescale tau_w);        // w << a0 limit

// Spatial-overlap approximation for a released thermal cloud; dims=2 squares
// the 1d result.
double eta_release_thermal(double t, double sigma_x, double sigma_v, double w,
                           double mass, int dims);
Timescale release_thermal_tau(double sigma_v, double w, double mass); // w/sigma_{v,r}

// --- Energy-mapping (Kuhr) vs frozen-position comparison ----------------------

enum class KuhrVariant { KuhrIntermediate, RamanNathHighT };

struct KuhrParams {
    double beta = 0.0;    // 1/J
    double kappa_g = 0.0; // N/m, > 0
    double kappa_r = 0.0; // N/m
    int dims = 3;
    KuhrVariant variant = KuhrVariant::KuhrIntermediate;
};

struct KuhrResult {
    double eta = 1.0;              // |C|^2
    Timescale K;                   // beta hbar omega_g/(omega_g - omega_r)
    Timescale tau_kappa;           // beta hbar kappa_g/|kappa_g - kappa_r|
    std::vector<std::string> warnings; // intermediate-temperature window checks
};

// |C|^2 = (1+t^2/K^2)^-d (Kuhr) or (1+t^2/tau_kappa^2)^(-d/2) (frozen-position).
// Needs mass and oscillator length scale only for the validity window, which
// is checked when mass > 0 and a_g > 0 are supplied.
KuhrResult eta_kuhr(double t, const KuhrParams& p, double mass = 0.0);

// --- General frozen-position (Raman-Nath) quadrature ---------------------------

struct RamanNathScene {
    std::function<double(double, double)> density;  // rho_g(x,y), normalized
    std::function<double(double, double)> mode_sq;  // |v|^2(x,y), normalized
    std::function<double(double, double)> dV;       // V_r - V_g in J
    double extent_x = 0.0; // half-width of the integration box (>= 6 sigma)
    double extent_y = 0.0;
    double rel_tol = 1e-6;
};

// C(t) = integral rho_g |v|^2 exp(i [V_g - V_r] t / hbar), unnormalized.
std::complex<double> raman_nath_coherence(double t, const RamanNathScene& scene);
// eta/eta0 = |C(t)/C(0)|^2.
double eta_raman_nath(double t, const RamanNathScene& scene);

// --- Composition ----------------------------------------------------------------

enum class ComposeMode { CartesianProduct, MixtureAverage };

// CartesianProduct multiplies eta/eta0 factors sample-by-sample;
// MixtureAverage forms sum_n P_n eta_n with the given weights (must sum to 1
// within 1e-9; ignored for CartesianProduct). Time grids must match.
DecayCurve compose(const std::vector<DecayCurve>& curves, ComposeMode mode,
                   const std::vector<double>& weights = {});

// Phenomenological zero-temperature offset: Gaussian factor exp(-t^2/tau_off^2)
// combined in quadrature with other Gaussian mechanisms via CartesianProduct.
DecayCurve gaussian_offset_curve(const std::vector<double>& times, Timescale tau_off);

// Sample any scalar model on a time grid.
DecayCurve sample_curve(const std::vector<double>& times,
                        const std::function<double(double)>& eta_of_t);

} // namespace spinwave
