// coherence_models.cpp - closed-form decay laws and composition rules.
#include "spinwave/coherence_models.hpp"

#include "spinwave/constants.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numeric>

namespace spinwave {

namespace {
constexpr double pi = constants::pi;
constexpr double hbar = constants::hbar;
using cplx = std::complex<double>;
} // namespace

// --- Recoil -----------------------------------------------------------------

Timescale recoil_tau(double k_R, double sigma_v) {
    if (k_R < 0.0 || sigma_v < 0.0)
        throw ConfigError("recoil_tau: k_R and sigma_v must be >= 0");
    const double prod = k_R * sigma_v;
    if (prod == 0.0) return Timescale::infinite();
    return Timescale::of(1.0 / prod);
}

Timescale recoil_tau_from_lambda(double lambda_dB, double v_R) {
    if (lambda_dB <= 0.0) throw ConfigError("recoil_tau_from_lambda: lambda_dB must be > 0");
    if (v_R == 0.0) return Timescale::infinite();
    return Timescale::of(lambda_dB / (std::abs(v_R) * std::sqrt(2.0 * pi)));
}

double eta_recoil(double t, double k_R, double sigma_v) {
    const Timescale tau = recoil_tau(k_R, sigma_v);
    return std::exp(-tau.t2_over_tau2(t));
}

// --- Harmonic + sag ----------------------------------------------------------

HarmonicTrapTimescales harmonic_trap_timescales(const DerivedScales& scales) {
    if (scales.w_r <= 0.0)
        throw ConfigError("harmonic_trap_timescales: w_r must be > 0");
    HarmonicTrapTimescales out;
    out.tau_F = (scales.F == 0.0)
                    ? Timescale::infinite()
                    : Timescale::of(2.0 * hbar / (scales.w_r * std::abs(scales.F)));
    const double dkappa = std::abs(scales.kappa_g - scales.kappa_r);
    out.tau_kappa = (dkappa == 0.0)
                        ? Timescale::infinite()
                        : Timescale::of(4.0 * hbar / (scales.w_r * scales.w_r * dkappa));
    return out;
}

double eta_harmonic_sag(double t, Timescale tau_F, Timescale tau_kappa) {
    const double zeta1_sq = 1.0 + tau_kappa.t2_over_tau2(t); // |1 - i t/tau_kappa|^2
    return std::exp(-tau_F.t2_over_tau2(t) / zeta1_sq) / zeta1_sq;
}

Timescale harmonic_validity_time(double mass, double kappa_g, double kappa_r) {
    const double dkappa = std::abs(kappa_r - kappa_g);
    if (dkappa == 0.0) return Timescale::infinite();
    return Timescale::of(2.0 * pi * std::sqrt(mass / dkappa));
}

// --- Linear force, exact -------------------------------------------------------

double eta_linear_force_exact(double t, const LinearForceParams& p) {
    if (p.w <= 0.0 || p.mass <= 0.0)
        throw ConfigError("eta_linear_force_exact: w and mass must be > 0");
    if (p.sigma_v < 0.0)
        throw ConfigError("eta_linear_force_exact: sigma_v must be >= 0");
    // The model has no solution for a force along the beam axis (infinitely
    // narrow longitudinal momentum distribution); reject rather than guess.
    // Forces are taken along x by convention, so only F_x is accepted.

    const double tau_w = p.mass * p.w * p.w / hbar;
    const cplx zeta(1.0 + p.sigma_v * p.sigma_v * t * t / (p.w * p.w), t / tau_w);
    const double k_F = p.F_x * t / hbar;

    const double kRx = p.k_R[0], kRy = p.k_R[1], kRz = p.k_R[2];
    const double re_term = std::real((zeta - 1.0) / zeta);
    const double exponent =
        -t * t * kRz * kRz * p.sigma_v * p.sigma_v -
        0.25 * p.w * p.w * k_F * k_F -
        p.w * p.w * (kRy * kRy + (kRx + k_F) * (kRx + k_F)) * re_term;
    return std::exp(exponent) / std::norm(zeta);
}

Timescale linear_force_tau_F_infty(double w, double F) {
    if (F == 0.0) return Timescale::infinite();
    return Timescale::of(2.0 * hbar / (w * std::abs(F)));
}

Timescale linear_force_tau_w(double mass, double w) {
    return Timescale::of(mass * w * w / hbar);
}

double eta_tau_w_limit(double t, double mass, double w) {
    const Timescale tau_w = linear_force_tau_w(mass, w);
    return 1.0 / (1.0 + tau_w.t2_over_tau2(t));
}

double eta_thermal_beam_escape(double t, double sigma_v, double w) {
    const double u = sigma_v * t / w;
    const double d = 1.0 + u * u;
    return 1.0 / (d * d);
}

double eta_jenkins(double t, double w, double sigma_v, double mass,
                   const std::array<double, 3>& k_R) {
    // F = 0 special case at w sigma_k >> 1: |zeta| ~ 1 + sigma_v^2 t^2 / w^2.
    (void)mass;
    const double zeta_abs = 1.0 + sigma_v * sigma_v * t * t / (w * w);
    const double kRt2 = k_R[0] * k_R[0] + k_R[1] * k_R[1];
    const double expo = -t * t * sigma_v * sigma_v * (k_R[2] * k_R[2] + kRt2 / zeta_abs);
    return std::exp(expo) / (zeta_abs * zeta_abs);
}

// --- Exponential ----------------------------------------------------------------

double eta_exponential(double t, double gamma_rg) {
    if (gamma_rg < 0.0) throw ConfigError("eta_exponential: gamma must be >= 0");
    return std::exp(-gamma_rg * t);
}

// --- Release: BEC ------------------------------------------------------------------

double eta_release_bec(double t, double a0, double w, double omega) {
    if (a0 <= 0.0 || w <= 0.0)
        throw ConfigError("eta_release_bec: a0 and w must be > 0");
    const double a2 = a0 * a0, w2 = w * w;
    const double ot = omega * t;
    const double s = 2.0 * a2 + w2;
    const double num = w2 * w2 * s * (s + 2.0 * a2 * ot * ot);
    const double g = w2 + a2 * ot * ot;
    const double den = s * s * g * g + 4.0 * std::pow(a2, 4) * ot * ot;
    return std::sqrt(num / den);
}

Timescale release_bec_tau_a(double mass, double a0, double w) {
    return Timescale::of(mass * a0 * w / hbar);
}

double eta_release_bec_narrow(double t, Timescale tau_a) {
    return 1.0 / std::sqrt(1.0 + 0.5 * tau_a.t2_over_tau2(t));
}

double eta_release_bec_wide(double t, Timescale tau_w) {
    return 1.0 / std::sqrt(1.0 + tau_w.t2_over_tau2(t));
}

// --- Release: thermal ---------------------------------------------------------------

double eta_release_thermal(double t, double sigma_x, double sigma_v, double w,
                           double mass, int dims) {
    if (sigma_x <= 0.0 || w <= 0.0 || mass <= 0.0 || sigma_v < 0.0)
        throw ConfigError("eta_release_thermal: invalid parameters");
    if (dims != 1 && dims != 2)
        throw ConfigError("eta_release_thermal: dims must be 1 or 2");

    const double sigma_g2 = sigma_x * sigma_x + sigma_v * sigma_v * t * t;
    const double sigma_r0_2 = 1.0 / (1.0 / (sigma_x * sigma_x) + 4.0 / (w * w));
    const double sigma_vr2 =
        sigma_v * sigma_v + hbar * hbar / (mass * mass * w * w);
    const double sigma_r2 = sigma_r0_2 + sigma_vr2 * t * t;

    const double inv_w2 = 1.0 / (w * w);
    const double eta_1d = std::sqrt(1.0 / (4.0 * sigma_g2) + inv_w2) /
                          std::sqrt(sigma_r2) /
                          (1.0 / (4.0 * sigma_g2) + 1.0 / (4.0 * sigma_r2) + inv_w2);
    return dims == 1 ? eta_1d : eta_1d * eta_1d;
}

Timescale release_thermal_tau(double sigma_v, double w, double mass) {
    const double sigma_vr =
        std::sqrt(sigma_v * sigma_v + hbar * hbar / (mass * mass * w * w));
    return Timescale::of(w / sigma_vr);
}

// --- Kuhr comparison -----------------------------------------------------------------

KuhrResult eta_kuhr(double t, const KuhrParams& p, double mass) {
    if (p.kappa_g <= 0.0) throw ConfigError("eta_kuhr: kappa_g must be > 0");
    if (p.beta <= 0.0) throw ConfigError("eta_kuhr: beta must be > 0");
    if (p.dims < 1 || p.dims > 3) throw ConfigError("eta_kuhr: dims must be 1..3");

    KuhrResult out;
    const double dkappa = p.kappa_g - p.kappa_r;
    if (dkappa == 0.0) {
        out.K = Timescale::infinite();
        out.tau_kappa = Timescale::infinite();
        out.eta = 1.0;
        return out;
    }
    out.tau_kappa = Timescale::of(p.beta * hbar * p.kappa_g / std::abs(dkappa));
    if (p.kappa_r > 0.0) {
        const double root = 1.0 - std::sqrt(p.kappa_r / p.kappa_g);
        out.K = (root == 0.0) ? Timescale::infinite()
                              : Timescale::of(p.beta * hbar / std::abs(root));
    } else {
        out.K = Timescale::of(p.beta * hbar); // omega_r not real; |1 - ...| ~ 1
        out.warnings.push_back("kappa_r <= 0: energy-mapping timescale K ill-defined");
    }

    if (p.variant == KuhrVariant::KuhrIntermediate) {
        out.eta = std::pow(1.0 + out.K.t2_over_tau2(t), -p.dims);
        // Intermediate-temperature window: hbar omega_g << k_B T << hbar omega_g a_g/|da|.
        if (mass > 0.0 && p.kappa_r > 0.0) {
            const double omega_g = std::sqrt(p.kappa_g / mass);
            const double omega_r = std::sqrt(p.kappa_r / mass);
            const double a_g = std::sqrt(hbar / (mass * omega_g));
            const double a_r = std::sqrt(hbar / (mass * omega_r));
            const double x = p.beta * hbar * omega_g; // hbar omega_g / k_B T
            const double da_ratio = std::abs(a_r - a_g) / a_g;
            if (x > 0.2)
                out.warnings.push_back(
                    "temperature not well above level spacing (hbar*omega_g/kT = " +
                    std::to_string(x) + ")");
            if (da_ratio > 0.2 * x)
                out.warnings.push_back(
                    "temperature above the energy-mapping window (|da|/a_g = " +
                    std::to_string(da_ratio) + " vs hbar*omega_g/kT = " +
                    std::to_string(x) + ")");
        }
    } else {
        out.eta = std::pow(1.0 + out.tau_kappa.t2_over_tau2(t), -0.5 * p.dims);
    }
    return out;
}

// --- General frozen-position quadrature --------------------------------------------

namespace {

// One component (real or imaginary) of the 2d coherence integral.
double integrate_2d(const RamanNathScene& scene,
                    const std::function<double(double, double)>& integrand,
                    double abs_tol_scale) {
    using quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    double max_inner_err = 0.0;
    auto inner = [&](double y) {
        double err = 0.0;
        const double v = quad::integrate(
            [&](double x) { return integrand(x, y); }, -scene.extent_x,
            scene.extent_x, 12, scene.rel_tol * 0.01, &err);
        max_inner_err = std::max(max_inner_err, err);
        return v;
    };
    double err = 0.0;
    const double v =
        quad::integrate(inner, -scene.extent_y, scene.extent_y, 12,
                        scene.rel_tol * 0.01, &err);
    // Inner error estimates are absolute per outer evaluation point; the
    // outer integration multiplies them by at most the y-interval width.
    const double achieved = err + max_inner_err * 2.0 * scene.extent_y;
    // The density and mode carry physical units, so the natural scale of the
    // integral can be far from 1; never demand a tighter absolute error than
    // rel_tol times the value just computed.
    const double scale = std::max(abs_tol_scale, std::abs(v));
    if (achieved > scene.rel_tol * scale)
        throw NumericalError("raman_nath_coherence: quadrature did not converge "
                             "(achieved absolute error " + std::to_string(achieved) +
                             ", required " +
                             std::to_string(scene.rel_tol * scale) + ")");
    return v;
}

} // namespace

std::complex<double> raman_nath_coherence(double t, const RamanNathScene& scene) {
    if (!scene.density || !scene.mode_sq || !scene.dV)
        throw ConfigError("raman_nath_coherence: scene functions must be set");
    if (scene.extent_x <= 0.0 || scene.extent_y <= 0.0)
        throw ConfigError("raman_nath_coherence: extents must be > 0");

    auto weight = [&](double x, double y) {
        return scene.density(x, y) * scene.mode_sq(x, y);
    };
    // Normalization scale for the error check: C(0) >= |C(t)|.
    const double c0 = integrate_2d(
        scene, [&](double x, double y) { return weight(x, y); }, 1.0);
    if (t == 0.0) return {c0, 0.0};

    const double re = integrate_2d(
        scene,
        [&](double x, double y) {
            return weight(x, y) * std::cos(scene.dV(x, y) * t / hbar);
        },
        c0);
    const double im = integrate_2d(
        scene,
        [&](double x, double y) {
            // exp(i [V_g - V_r] t / hbar) = exp(-i dV t / hbar)
            return -weight(x, y) * std::sin(scene.dV(x, y) * t / hbar);
        },
        c0);
    return {re, im};
}

double eta_raman_nath(double t, const RamanNathScene& scene) {
    const cplx c0 = raman_nath_coherence(0.0, scene);
    const cplx ct = raman_nath_coherence(t, scene);
    return std::norm(ct / c0);
}

// --- Composition ---------------------------------------------------------------------

namespace {

void require_matching_grids(const std::vector<DecayCurve>& curves) {
    if (curves.empty()) throw ConfigError("compose: no curves given");
    const auto& t0 = curves.front().times;
    for (const auto& c : curves) {
        if (c.times.size() != t0.size())
            throw ConfigError("compose: mismatched time grids (sizes differ)");
        for (std::size_t i = 0; i < t0.size(); ++i) {
            const double scale = std::max(std::abs(t0[i]), 1e-300);
            if (std::abs(c.times[i] - t0[i]) > 1e-9 * scale)
                throw ConfigError("compose: mismatched time grids");
        }
    }
}

} // namespace

DecayCurve compose(const std::vector<DecayCurve>& curves, ComposeMode mode,
                   const std::vector<double>& weights) {
    require_matching_grids(curves);
    DecayCurve out;
    out.times = curves.front().times;
    out.eta.assign(out.times.size(), mode == ComposeMode::CartesianProduct ? 1.0 : 0.0);

    if (mode == ComposeMode::CartesianProduct) {
        for (const auto& c : curves)
            for (std::size_t i = 0; i < out.eta.size(); ++i) out.eta[i] *= c.eta[i];
    } else {
        if (weights.size() != curves.size())
            throw ConfigError("compose: mixture weights must match curve count");
        double sum = 0.0;
        for (double wgt : weights) {
            if (wgt < 0.0) throw ConfigError("compose: mixture weights must be >= 0");
            sum += wgt;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("compose: mixture weights must sum to 1");
        for (std::size_t c = 0; c < curves.size(); ++c)
            for (std::size_t i = 0; i < out.eta.size(); ++i)
                out.eta[i] += weights[c] * curves[c].eta[i];
    }
    for (const auto& c : curves)
        out.warnings.insert(out.warnings.end(), c.warnings.begin(), c.warnings.end());
    return out;
}

DecayCurve gaussian_offset_curve(const std::vector<double>& times, Timescale tau_off) {
    return sample_curve(times, [tau_off](double t) {
        return std::exp(-tau_off.t2_over_tau2(t));
    });
}

DecayCurve sample_curve(const std::vector<double>& times,
                        const std::function<double(double)>& eta_of_t) {
    DecayCurve out;
    out.times = times;
    out.eta.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && times[i] <= times[i - 1])
            throw ConfigError("sample_curve: times must be strictly increasing");
        out.eta.push_back(eta_of_t(times[i]));
    }
    return out;
}

} // namespace spinwave
