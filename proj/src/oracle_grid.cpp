// oracle_grid.cpp - 1d split-operator propagator, storage overlaps, Gibbs
// weights and thermal averaging, Hermite eigenstates on the grid, and the
// exact two-oscillator overlap sum.
#include "spinwave/oracle.hpp"

#include "spinwave/constants.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace spinwave {

namespace {
constexpr double pi = constants::pi;
constexpr double hbar = constants::hbar;
using cplx = std::complex<double>;

// FFTW plan creation/destruction is not thread-safe; execution on distinct
// buffers is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

// --- Grid and state ------------------------------------------------------------

Grid1D Grid1D::make(double x_min, double x_max, std::size_t points) {
    if (!(x_max > x_min)) throw ConfigError("Grid1D: x_max must exceed x_min");
    if (points < 256 || (points & (points - 1)) != 0)
        throw ConfigError("Grid1D: points must be a power of two >= 256");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.points = points;
    g.dx = (x_max - x_min) / static_cast<double>(points);
    g.dk = 2.0 * pi / (static_cast<double>(points) * g.dx);
    return g;
}

double Grid1D::k(std::size_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(points);
    auto j = static_cast<std::ptrdiff_t>(i);
    if (j > n / 2 - 1) j -= n;
    return dk * static_cast<double>(j);
}

double GridState::norm_sq() const {
    double s = 0.0;
    for (const auto& a : psi) s += std::norm(a);
    return s * grid.dx;
}

std::complex<double> StorageOperator::amplitude(double x, double L_x) const {
    const cplx phase = std::polar(1.0, k_R * x);
    if (!waist) return phase; // sqrt(L_x) * e^{ikx}/sqrt(L_x)
    const double w = *waist;
    const double env = std::exp(-x * x / (w * w)) * std::pow(2.0 / (pi * w * w), 0.25);
    return std::sqrt(L_x) * env * phase;
}

double StorageOperator::weight(double x, double L_x) const {
    return std::norm(amplitude(x, L_x));
}

// --- Split-operator propagation ---------------------------------------------------

namespace {

class Propagator1D {
  public:
    Propagator1D(const Grid1D& grid, const Potential& V, double mass,
                 std::vector<cplx> psi0)
        : grid_(grid), mass_(mass), psi_(std::move(psi0)) {
        if (V) {
            Vx_.resize(grid_.points);
            for (std::size_t i = 0; i < grid_.points; ++i) Vx_[i] = V(grid_.x(i));
        }
        kin_.resize(grid_.points);
        for (std::size_t i = 0; i < grid_.points; ++i) {
            const double k = grid_.k(i);
            kin_[i] = hbar * k * k / (2.0 * mass_); // kinetic angular frequency
        }
        std::lock_guard<std::mutex> lock(fftw_mutex());
        auto* data = reinterpret_cast<fftw_complex*>(psi_.data());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(grid_.points), data, data,
                                FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(grid_.points), data, data,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Propagator1D() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    Propagator1D(const Propagator1D&) = delete;
    Propagator1D& operator=(const Propagator1D&) = delete;

    // One Strang step: V/2, full kinetic, V/2.
    void step(double h) {
        apply_potential(0.5 * h);
        fftw_execute(fwd_);
        const double inv_n = 1.0 / static_cast<double>(grid_.points);
        for (std::size_t i = 0; i < psi_.size(); ++i)
            psi_[i] *= std::polar(inv_n, -kin_[i] * h);
        fftw_execute(bwd_);
        apply_potential(0.5 * h);
    }

    double max_abs_potential() const {
        double m = 0.0;
        for (double v : Vx_) m = std::max(m, std::abs(v));
        return m;
    }

    // Largest |k| carrying spectral weight above 1e-14 of the peak.
    double occupied_bandwidth() {
        std::vector<cplx> spec = psi_;
        {
            std::lock_guard<std::mutex> lock(fftw_mutex());
            auto* data = reinterpret_cast<fftw_complex*>(spec.data());
            fftw_plan p = fftw_plan_dft_1d(static_cast<int>(grid_.points), data,
                                           data, FFTW_FORWARD, FFTW_ESTIMATE);
            fftw_execute(p);
            fftw_destroy_plan(p);
        }
        double peak = 0.0;
        for (const auto& a : spec) peak = std::max(peak, std::norm(a));
        double k_occ = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i)
            if (std::norm(spec[i]) > 1e-14 * peak)
                k_occ = std::max(k_occ, std::abs(grid_.k(i)));
        return k_occ;
    }

    const std::vector<cplx>& psi() const { return psi_; }
    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : psi_) s += std::norm(a);
        return s * grid_.dx;
    }

  private:
    void apply_potential(double h) {
        if (Vx_.empty()) return;
        for (std::size_t i = 0; i < psi_.size(); ++i)
            psi_[i] *= std::polar(1.0, -Vx_[i] * h / hbar);
    }

    Grid1D grid_;
    double mass_;
    std::vector<cplx> psi_;
    std::vector<double> Vx_;  // empty = free
    std::vector<double> kin_; // hbar k^2 / 2m per bin
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

} // namespace

OverlapSeries propagate_overlaps(const GridState& initial, const StorageOperator& R,
                                 const Potential& V_g, const Potential& V_r,
                                 const std::vector<double>& times, double mass,
                                 const PropagationOptions& opt) {
    if (mass <= 0.0) throw ConfigError("propagate_overlaps: mass must be > 0");
    if (times.empty()) throw ConfigError("propagate_overlaps: no times given");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1]))
            throw ConfigError("propagate_overlaps: times must be ascending and >= 0");
    }

    const Grid1D& grid = initial.grid;
    const double L_x = grid.length();

    // chi(0) = R^dag psi(0)
    std::vector<cplx> chi0(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i)
        chi0[i] = R.amplitude(grid.x(i), L_x) * initial.psi[i];

    Propagator1D prop_g(grid, V_g, mass, initial.psi);
    Propagator1D prop_r(grid, V_r, mass, std::move(chi0));

    // Step size: keep both potential and kinetic phase advances below 0.1 rad
    // per step. The kinetic bound uses the occupied bandwidth (the k-space
    // kinetic step is exact, so unoccupied Nyquist modes are irrelevant).
    double dt = opt.dt;
    if (dt <= 0.0 && !V_g && !V_r) {
        // Free evolution: the kinetic step is exact, one step per interval.
        dt = times.back();
    }
    if (dt <= 0.0) {
        const double v_max = std::max(prop_g.max_abs_potential(), prop_r.max_abs_potential());
        double k_occ = opt.k_occupied;
        if (k_occ <= 0.0)
            k_occ = std::max(prop_g.occupied_bandwidth(), prop_r.occupied_bandwidth());
        dt = times.back() / 16.0;
        if (v_max > 0.0) dt = std::min(dt, 0.1 * hbar / v_max);
        if (k_occ > 0.0) dt = std::min(dt, 0.1 * 2.0 * mass / (hbar * k_occ * k_occ));
        if (dt <= 0.0) dt = times.back();
    }

    OverlapSeries out;
    out.times = times;

    const double norm_g0 = prop_g.norm_sq();
    const double norm_r0 = prop_r.norm_sq();

    // M(0) = integral L_x |v|^2 |psi(0)|^2 dx
    {
        double m0 = 0.0;
        for (std::size_t i = 0; i < grid.points; ++i)
            m0 += R.weight(grid.x(i), L_x) * std::norm(initial.psi[i]);
        out.M0 = m0 * grid.dx;
    }

    auto record = [&]() {
        cplx q = 0.0;
        double m = 0.0;
        const auto& pg = prop_g.psi();
        const auto& pr = prop_r.psi();
        for (std::size_t i = 0; i < grid.points; ++i) {
            const cplx r_amp = R.amplitude(grid.x(i), L_x);
            q += std::conj(pg[i]) * std::conj(r_amp) * pr[i];
            m += std::norm(r_amp) * std::norm(pg[i]);
        }
        out.Q.push_back(q * grid.dx);
        out.M.push_back(m * grid.dx);
    };

    double t_now = 0.0;
    for (double t_target : times) {
        const double span = t_target - t_now;
        if (span > 0.0) {
            const auto n_steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
            const double h = span / static_cast<double>(n_steps);
            for (std::size_t s = 0; s < n_steps; ++s) {
                prop_g.step(h);
                prop_r.step(h);
            }
            t_now = t_target;
        }
        const double drift_g = std::abs(prop_g.norm_sq() - norm_g0) / norm_g0;
        const double drift_r = std::abs(prop_r.norm_sq() - norm_r0) / std::max(norm_r0, 1e-300);
        if (drift_g > 1e-6 || drift_r > 1e-6)
            throw NumericalError("propagate_overlaps: norm drift exceeded 1e-6 (g: " +
                                 std::to_string(drift_g) + ", r: " +
                                 std::to_string(drift_r) + ")");
        record();
    }
    return out;
}

// --- Thermal weights and averaging -----------------------------------------------

std::vector<double> gibbs_weights(const ThermalSpec& spec) {
    if (spec.beta <= 0.0 || spec.omega <= 0.0)
        throw ConfigError("gibbs_weights: beta and omega must be > 0");
    const double q = std::exp(-spec.beta * hbar * spec.omega);
    const double tail = std::pow(q, static_cast<double>(spec.n_max + 1));
    if (!spec.renormalize_tail && tail > spec.tail_eps) {
        const auto needed = static_cast<std::size_t>(
            std::ceil(std::log(spec.tail_eps) / std::log(q))) ;
        throw NumericalError("gibbs_weights: tail weight " + std::to_string(tail) +
                             " exceeds bound " + std::to_string(spec.tail_eps) +
                             "; need n_max >= " + std::to_string(needed));
    }
    std::vector<double> w(spec.n_max + 1);
    const double norm = spec.renormalize_tail ? (1.0 - q) / (1.0 - tail) : (1.0 - q);
    for (std::size_t n = 0; n <= spec.n_max; ++n)
        w[n] = norm * std::pow(q, static_cast<double>(n));
    return w;
}

ThermalEfficiency thermal_efficiency(const std::vector<OverlapSeries>& per_state,
                                     const std::vector<double>& weights) {
    if (per_state.empty() || per_state.size() != weights.size())
        throw ConfigError("thermal_efficiency: states and weights must match");
    const auto& times = per_state.front().times;
    for (const auto& s : per_state)
        if (s.times != times)
            throw ConfigError("thermal_efficiency: overlap series share one time grid");

    ThermalEfficiency out;
    out.coherence.times = times;
    out.coherence.C.assign(times.size(), 0.0);
    out.coherence.mu_t.assign(times.size(), 0.0);
    out.coherence.mu0 = 0.0;
    for (std::size_t n = 0; n < per_state.size(); ++n) {
        out.coherence.mu0 += weights[n] * per_state[n].M0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            out.coherence.C[i] += weights[n] * per_state[n].Q[i];
            out.coherence.mu_t[i] += weights[n] * per_state[n].M[i];
        }
    }
    out.curve.times = times;
    out.curve.eta.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        out.curve.eta[i] = out.coherence.eta_over_eta0(i);
    return out;
}

// --- Hermite eigenstates --------------------------------------------------------------

GridState hermite_state(unsigned n, double a0, const Grid1D& grid) {
    if (a0 <= 0.0) throw ConfigError("hermite_state: a0 must be > 0");
    const double turning = a0 * std::sqrt(2.0 * n + 1.0);
    const double required = 4.0 * turning;
    if (-grid.x_min < required || grid.x_max < required)
        throw ConfigError("hermite_state: grid too small; need at least +-" +
                          std::to_string(required) + " m around the origin");

    GridState st;
    st.grid = grid;
    st.psi.resize(grid.points);
    const double norm0 = std::pow(pi, -0.25) / std::sqrt(a0);
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double u = grid.x(i) / a0;
        // Upward recurrence on normalized Hermite functions
        // h_{m+1} = sqrt(2/(m+1)) u h_m - sqrt(m/(m+1)) h_{m-1}.
        double h_prev = 0.0;
        double h = norm0 * std::exp(-0.5 * u * u);
        for (unsigned m = 0; m < n; ++m) {
            const double h_next = std::sqrt(2.0 / (m + 1.0)) * u * h -
                                  std::sqrt(static_cast<double>(m) / (m + 1.0)) * h_prev;
            h_prev = h;
            h = h_next;
        }
        st.psi[i] = h;
    }
    return st;
}

// --- Exact two-oscillator overlap sum ----------------------------------------------

KuhrExactResult kuhr_exact(double beta, double omega_g, double omega_r,
                           double mass, std::size_t n_max,
                           const std::vector<double>& times, KuhrMethod method,
                           double tail_eps) {
    if (beta <= 0.0 || omega_g <= 0.0 || omega_r <= 0.0 || mass <= 0.0)
        throw ConfigError("kuhr_exact: beta, omegas, mass must be > 0");
    const double q = std::exp(-beta * hbar * omega_g);
    const double tail = std::pow(q, static_cast<double>(n_max + 1));
    if (tail > tail_eps) {
        const auto needed =
            static_cast<std::size_t>(std::ceil(std::log(tail_eps) / std::log(q)));
        throw NumericalError("kuhr_exact: Gibbs tail " + std::to_string(tail) +
                             " exceeds " + std::to_string(tail_eps) +
                             "; need n_max >= " + std::to_string(needed));
    }

    const double a_g = std::sqrt(hbar / (mass * omega_g));
    const double a_r = std::sqrt(hbar / (mass * omega_r));
    const double da = a_r - a_g;

    KuhrExactResult out;
    out.times = times;

    // Validity window: hbar omega_g << k_B T << hbar omega_g a_g/|da|.
    const double x = beta * hbar * omega_g;
    if (x > 0.2)
        out.warnings.push_back("temperature not well above level spacing");
    if (da != 0.0 && std::abs(da) / a_g > 0.2 * x)
        out.warnings.push_back("temperature above the energy-mapping window");

    // Overlap probabilities |<phi_{a_g,n}|phi_{a_r,n'}>|^2.
    const std::size_t np_max = n_max + 12;
    std::vector<std::vector<double>> w(n_max + 1, std::vector<double>(np_max + 1, 0.0));
    if (method == KuhrMethod::GridOverlap) {
        const double a_big = std::max(a_g, a_r);
        const double extent = 4.0 * a_big * std::sqrt(2.0 * np_max + 1.0) + 8.0 * a_big;
        std::size_t points = 256;
        const double dx_needed = std::min(a_g, a_r) / 16.0;
        while ((2.0 * extent) / static_cast<double>(points) > dx_needed) points *= 2;
        const Grid1D grid = Grid1D::make(-extent, extent, points);

        std::vector<GridState> phi_g, phi_r;
        phi_g.reserve(n_max + 1);
        phi_r.reserve(np_max + 1);
        for (std::size_t n = 0; n <= n_max; ++n)
            phi_g.push_back(hermite_state(static_cast<unsigned>(n), a_g, grid));
        for (std::size_t m = 0; m <= np_max; ++m)
            phi_r.push_back(hermite_state(static_cast<unsigned>(m), a_r, grid));
        for (std::size_t n = 0; n <= n_max; ++n)
            for (std::size_t m = 0; m <= np_max; ++m) {
                if ((n + m) % 2 != 0) continue; // parity selection rule
                double ov = 0.0;
                for (std::size_t i = 0; i < grid.points; ++i)
                    ov += std::real(phi_g[n].psi[i]) * std::real(phi_r[m].psi[i]);
                ov *= grid.dx;
                w[n][m] = ov * ov;
            }
    } else {
        if (std::abs(da) / a_g >= 0.3)
            throw ConfigError("kuhr_exact: perturbative overlaps need |da|/a_g < 0.3");
        const double eps2 = da * da / (4.0 * a_g * a_g);
        for (std::size_t n = 0; n <= n_max; ++n) {
            const auto nd = static_cast<double>(n);
            w[n][n] = 1.0 - eps2 * (nd * nd + nd + 1.0);
            if (n >= 2) w[n][n - 2] = eps2 * (nd - 1.0) * nd;
            // Second-order expansion as published (note the sign).
            w[n][n + 2] = -eps2 * (nd + 1.0) * (nd + 2.0);
        }
    }

    out.C.reserve(times.size());
    for (double t : times) {
        cplx c = 0.0;
        for (std::size_t n = 0; n <= n_max; ++n) {
            const double p_n = (1.0 - q) * std::pow(q, static_cast<double>(n));
            for (std::size_t m = 0; m <= np_max; ++m) {
                if (w[n][m] == 0.0) continue;
                c += p_n * w[n][m] *
                     std::polar(1.0, t * (omega_g * static_cast<double>(n) -
                                          omega_r * static_cast<double>(m)));
            }
        }
        c *= std::polar(1.0, 0.5 * t * (omega_g - omega_r));
        out.C.push_back(c);
    }
    return out;
}

} // namespace spinwave
