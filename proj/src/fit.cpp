// fit.cpp
#include "spinwave/fit.hpp"

#include "spinwave/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinwave {

namespace {

struct LinFit {
    double a = 0.0, b = 0.0;        // y = a + b x
    double sigma_a = 0.0, sigma_b = 0.0;
    double chi2 = 0.0;
    std::size_t n = 0;
};

// Weighted least squares of y = a + b x. Empty w = unweighted, in which case
// parameter uncertainties are scaled by the residual variance.
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& w) {
    const std::size_t n = x.size();
    if (n < 2) throw FitError("linear_fit: need at least 2 points");
    const bool weighted = !w.empty();
    double Sw = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = weighted ? w[i] : 1.0;
        if (wi <= 0.0) throw FitError("linear_fit: weights must be > 0");
        Sw += wi;
        Sx += wi * x[i];
        Sy += wi * y[i];
        Sxx += wi * x[i] * x[i];
        Sxy += wi * x[i] * y[i];
    }
    const double delta = Sw * Sxx - Sx * Sx;
    if (delta <= 0.0) throw FitError("linear_fit: degenerate abscissae");
    LinFit f;
    f.n = n;
    f.b = (Sw * Sxy - Sx * Sy) / delta;
    f.a = (Sxx * Sy - Sx * Sxy) / delta;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = weighted ? w[i] : 1.0;
        const double r = y[i] - (f.a + f.b * x[i]);
        f.chi2 += wi * r * r;
    }
    double var_a = Sxx / delta;
    double var_b = Sw / delta;
    if (!weighted) {
        const double s2 = n > 2 ? f.chi2 / static_cast<double>(n - 2) : 0.0;
        var_a *= s2;
        var_b *= s2;
    }
    f.sigma_a = std::sqrt(std::max(var_a, 0.0));
    f.sigma_b = std::sqrt(std::max(var_b, 0.0));
    return f;
}

struct Selected {
    std::vector<double> t, eta, sigma;
    std::size_t excluded = 0;
};

Selected select_points(const DecayCurve& curve, bool log_domain, double floor_frac) {
    if (curve.times.size() != curve.eta.size())
        throw FitError("fit_decay: times/eta size mismatch");
    const bool has_sigma = !curve.sigma_eta.empty();
    if (has_sigma && curve.sigma_eta.size() != curve.eta.size())
        throw FitError("fit_decay: sigma_eta size mismatch");
    double eta_max = 0.0;
    for (double e : curve.eta) eta_max = std::max(eta_max, e);
    const double floor = log_domain ? floor_frac * eta_max : 0.0;
    Selected s;
    for (std::size_t i = 0; i < curve.eta.size(); ++i) {
        if (curve.eta[i] <= floor) {
            ++s.excluded;
            continue;
        }
        s.t.push_back(curve.times[i]);
        s.eta.push_back(curve.eta[i]);
        if (has_sigma) s.sigma.push_back(curve.sigma_eta[i]);
    }
    return s;
}

// chi2 of the stretched-exponential inner linear solve at fixed p.
double stretched_chi2(const Selected& s, double p, LinFit* out) {
    std::vector<double> x(s.t.size()), y(s.t.size()), w;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        x[i] = std::pow(s.t[i], p);
        y[i] = std::log(s.eta[i]);
    }
    if (!s.sigma.empty()) {
        w.resize(s.t.size());
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            const double sl = s.sigma[i] / s.eta[i];
            w[i] = 1.0 / (sl * sl);
        }
    }
    const LinFit f = linear_fit(x, y, w);
    if (out) *out = f;
    return f.chi2;
}

} // namespace

std::string to_string(DecayModel m) {
    switch (m) {
        case DecayModel::Gaussian: return "gaussian";
        case DecayModel::Exponential: return "exponential";
        case DecayModel::Algebraic: return "algebraic";
        case DecayModel::StretchedExponential: return "stretched_exponential";
    }
    return "unknown";
}

double FitResult::eval(double t) const {
    const double eta0 = params.at("eta0").value;
    const double tau = params.at("tau").value;
    switch (model) {
        case DecayModel::Gaussian: return eta0 * std::exp(-t * t / (tau * tau));
        case DecayModel::Exponential: return eta0 * std::exp(-t / tau);
        case DecayModel::Algebraic: return eta0 / (1.0 + t * t / (tau * tau));
        case DecayModel::StretchedExponential:
            return eta0 * std::exp(-std::pow(t / tau, params.at("p").value));
    }
    return 0.0;
}

FitResult fit_decay(const DecayCurve& curve, DecayModel model, double floor_frac) {
    const bool log_domain = model != DecayModel::Algebraic;
    Selected s = select_points(curve, log_domain, floor_frac);
    const std::size_t min_points = model == DecayModel::StretchedExponential ? 5 : 4;
    if (s.t.size() < min_points)
        throw FitError("fit_decay: insufficient points (" + std::to_string(s.t.size()) +
                       " usable, need " + std::to_string(min_points) + ")");

    FitResult out;
    out.model = model;
    out.n_points = s.t.size();
    out.n_excluded = s.excluded;

    if (model == DecayModel::StretchedExponential) {
        // Golden-section minimization of chi2(p) on [0.5, 4].
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.5, hi = 4.0;
        double p1 = hi - gr * (hi - lo), p2 = lo + gr * (hi - lo);
        double f1 = stretched_chi2(s, p1, nullptr);
        double f2 = stretched_chi2(s, p2, nullptr);
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            if (f1 < f2) {
                hi = p2; p2 = p1; f2 = f1;
                p1 = hi - gr * (hi - lo);
                f1 = stretched_chi2(s, p1, nullptr);
            } else {
                lo = p1; p1 = p2; f1 = f2;
                p2 = lo + gr * (hi - lo);
                f2 = stretched_chi2(s, p2, nullptr);
            }
        }
        if (hi - lo > 1e-4) throw FitError("fit_decay: p search did not converge");
        const double p = 0.5 * (lo + hi);
        LinFit f;
        const double chi2 = stretched_chi2(s, p, &f);
        if (f.b >= 0.0) throw FitError("fit_decay: no decay resolved");
        const double tau = std::pow(-f.b, -1.0 / p);

        // sigma_p from the curvature of chi2(p), scaled by residual variance.
        const double h = 1e-3;
        const double c2 = stretched_chi2(s, p + h, nullptr) +
                          stretched_chi2(s, std::max(p - h, 0.5), nullptr) - 2.0 * chi2;
        double sigma_p = 0.0;
        if (c2 > 0.0) {
            const double dof = static_cast<double>(s.t.size()) - 3.0;
            const double s2 = s.sigma.empty() ? (dof > 0 ? chi2 / dof : 0.0) : 1.0;
            sigma_p = std::sqrt(2.0 * s2 * h * h / c2);
        }
        const double sigma_tau = std::abs(f.sigma_b * tau / (p * f.b));
        out.params["p"] = {p, sigma_p};
        out.params["tau"] = {tau, sigma_tau};
        out.params["eta0"] = {std::exp(f.a), std::exp(f.a) * f.sigma_a};
        out.residual_norm = std::sqrt(chi2);
        return out;
    }

    std::vector<double> x(s.t.size()), y(s.t.size()), w;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        switch (model) {
            case DecayModel::Gaussian:
                x[i] = s.t[i] * s.t[i];
                y[i] = std::log(s.eta[i]);
                break;
            case DecayModel::Exponential:
                x[i] = s.t[i];
                y[i] = std::log(s.eta[i]);
                break;
            case DecayModel::Algebraic:
                x[i] = s.t[i] * s.t[i];
                y[i] = 1.0 / s.eta[i];
                break;
            default: break;
        }
    }
    if (!s.sigma.empty()) {
        w.resize(s.t.size());
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            const double sy = model == DecayModel::Algebraic
                                  ? s.sigma[i] / (s.eta[i] * s.eta[i])
                                  : s.sigma[i] / s.eta[i];
            if (sy <= 0.0) throw FitError("fit_decay: nonpositive uncertainty");
            w[i] = 1.0 / (sy * sy);
        }
    }
    const LinFit f = linear_fit(x, y, w);
    out.residual_norm = std::sqrt(f.chi2);

    switch (model) {
        case DecayModel::Gaussian: {
            if (f.b >= 0.0) throw FitError("fit_decay: no decay resolved");
            const double tau = 1.0 / std::sqrt(-f.b);
            out.params["tau"] = {tau, 0.5 * f.sigma_b * tau * tau * tau};
            out.params["eta0"] = {std::exp(f.a), std::exp(f.a) * f.sigma_a};
            break;
        }
        case DecayModel::Exponential: {
            if (f.b >= 0.0) throw FitError("fit_decay: no decay resolved");
            const double tau = -1.0 / f.b;
            out.params["tau"] = {tau, f.sigma_b * tau * tau};
            out.params["eta0"] = {std::exp(f.a), std::exp(f.a) * f.sigma_a};
            break;
        }
        case DecayModel::Algebraic: {
            if (f.a <= 0.0 || f.b <= 0.0)
                throw FitError("fit_decay: no algebraic decay resolved");
            const double tau = std::sqrt(f.a / f.b);
            const double dda = 0.5 / std::sqrt(f.a * f.b);
            const double ddb = -0.5 * std::sqrt(f.a) / std::pow(f.b, 1.5);
            out.params["tau"] = {tau, std::hypot(dda * f.sigma_a, ddb * f.sigma_b)};
            out.params["eta0"] = {1.0 / f.a, f.sigma_a / (f.a * f.a)};
            break;
        }
        default: break;
    }
    return out;
}

TemperatureFitResult fit_tau_vs_temperature(
    const std::vector<std::pair<double, double>>& temperature_tau, double mass,
    const std::vector<double>& sigma_tau) {
    if (temperature_tau.size() < 3)
        throw FitError("fit_tau_vs_temperature: need >= 3 temperatures");
    if (mass <= 0.0) throw FitError("fit_tau_vs_temperature: mass must be > 0");
    if (!sigma_tau.empty() && sigma_tau.size() != temperature_tau.size())
        throw FitError("fit_tau_vs_temperature: sigma_tau size mismatch");

    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < temperature_tau.size(); ++i) {
        const auto [T, tau] = temperature_tau[i];
        if (T <= 0.0 || tau <= 0.0)
            throw FitError("fit_tau_vs_temperature: T and tau must be > 0");
        x.push_back(T);
        y.push_back(1.0 / (tau * tau));
        if (!sigma_tau.empty()) {
            const double sy = 2.0 * sigma_tau[i] / (tau * tau * tau);
            if (sy <= 0.0) throw FitError("fit_tau_vs_temperature: bad sigma_tau");
            w.push_back(1.0 / (sy * sy));
        }
    }
    const LinFit f = linear_fit(x, y, w);
    if (f.b <= 0.0)
        throw FitError("fit_tau_vs_temperature: nonpositive slope; no thermal decay");

    TemperatureFitResult out;
    out.n_points = temperature_tau.size();
    out.residual_norm = std::sqrt(f.chi2);

    // slope = k_R^2 k_B / m  ->  lambda_R = 2 pi / k_R.
    const double k_R = std::sqrt(f.b * mass / constants::k_B);
    const double lambda = 2.0 * constants::pi / k_R;
    out.lambda_R = {lambda, 0.5 * lambda * f.sigma_b / f.b};

    if (f.a > 0.0) {
        const double tau_off = 1.0 / std::sqrt(f.a);
        out.tau_offset = {tau_off, 0.5 * f.sigma_a / std::pow(f.a, 1.5)};
        out.offset_resolved = true;
    } else {
        out.tau_offset = {std::numeric_limits<double>::infinity(), 0.0};
        out.offset_resolved = false; // none resolved
    }
    return out;
}

} // namespace spinwave
