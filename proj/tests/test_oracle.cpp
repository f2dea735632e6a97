#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spinwave/coherence_models.hpp"
#include "spinwave/constants.hpp"
#include "spinwave/oracle.hpp"
#include "spinwave/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <complex>
#include <vector>

using namespace spinwave;
using constants::hbar;
using constants::k_B;
using constants::m_rb87;
using constants::pi;

namespace {

// Uniform plane wave on the grid, unit norm, k on the dk lattice.
GridState plane_wave(const Grid1D& grid, double k) {
    GridState st;
    st.grid = grid;
    st.psi.resize(grid.points);
    const double amp = 1.0 / std::sqrt(grid.length());
    for (std::size_t i = 0; i < grid.points; ++i)
        st.psi[i] = std::polar(amp, k * grid.x(i));
    return st;
}

double inner_product_real(const GridState& a, const GridState& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.psi.size(); ++i)
        acc += (std::conj(a.psi[i]) * b.psi[i]).real();
    return acc * a.grid.dx;
}

} // namespace

TEST_CASE("harmonic-oscillator eigenstates on the grid") {
    const double a0 = units::um_to_m(1.1);
    const Grid1D grid = Grid1D::make(-60.0 * a0, 60.0 * a0, 2048);

    SUBCASE("ground state is a Gaussian of rms width a0/sqrt(2)") {
        const GridState g = hermite_state(0, a0, grid);
        CHECK(g.norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
        double x2 = 0.0;
        for (std::size_t i = 0; i < grid.points; ++i)
            x2 += grid.x(i) * grid.x(i) * std::norm(g.psi[i]);
        x2 *= grid.dx;
        CHECK(std::sqrt(x2) == doctest::Approx(a0 / std::sqrt(2.0)).epsilon(1e-9));
    }

    SUBCASE("orthonormality up to n = 40") {
        std::vector<GridState> states;
        for (unsigned n = 0; n <= 40; ++n)
            states.push_back(hermite_state(n, a0, grid));
        for (unsigned m = 0; m <= 40; ++m)
            for (unsigned n = m; n <= 40; ++n) {
                const double ip = inner_product_real(states[m], states[n]);
                CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) < 1e-8);
            }
    }

    SUBCASE("grid must cover the classical turning points") {
        const Grid1D tight = Grid1D::make(-5.0 * a0, 5.0 * a0, 512);
        CHECK_THROWS_AS(hermite_state(40, a0, tight), ConfigError);
    }
}

TEST_CASE("free plane-wave overlaps carry the two-photon energy phase") {
    const double lambda_R = units::um_to_m(1.25);
    const double k_R = 2.0 * pi / lambda_R;
    const Grid1D grid = Grid1D::make(-16.0 * lambda_R, 16.0 * lambda_R, 1024);
    // k_R is automatically commensurate with this box (32 wavelengths).
    StorageOperator R;
    R.k_R = k_R;

    const std::vector<double> times = {units::us_to_s(3.0), units::us_to_s(11.0)};
    for (long j : {-40L, 0L, 25L}) {
        const double k = static_cast<double>(j) * grid.dk;
        const GridState st = plane_wave(grid, k);
        const OverlapSeries s =
            propagate_overlaps(st, R, nullptr, nullptr, times, m_rb87);
        const double E_g = hbar * hbar * k * k / (2.0 * m_rb87);
        const double E_r = hbar * hbar * (k + k_R) * (k + k_R) / (2.0 * m_rb87);
        for (std::size_t i = 0; i < times.size(); ++i) {
            CHECK(std::abs(s.Q[i]) == doctest::Approx(1.0).epsilon(1e-9));
            const std::complex<double> expect =
                std::polar(1.0, (E_g - E_r) * times[i] / hbar);
            CHECK(std::abs(s.Q[i] - expect) < 1e-8);
            CHECK(s.M[i] == doctest::Approx(1.0).epsilon(1e-9));
        }
        CHECK(s.M0 == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("identity storage with equal Hamiltonians is decay-free") {
    const double a0 = units::um_to_m(1.1);
    const double omega = hbar / (m_rb87 * a0 * a0);
    const Grid1D grid = Grid1D::make(-40.0 * a0, 40.0 * a0, 1024);
    StorageOperator R; // k_R = 0, no waist: R = identity
    const Potential V = [&](double x) {
        return 0.5 * m_rb87 * omega * omega * x * x;
    };
    const std::vector<double> times = {0.25 / omega, 2.0 / omega, 7.0 / omega};
    const GridState st = hermite_state(3, a0, grid);
    const OverlapSeries s = propagate_overlaps(st, R, V, V, times, m_rb87);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(s.Q[i] - std::complex<double>(s.M0, 0.0)) < 1e-6);
        CHECK(s.M[i] == doctest::Approx(s.M0).epsilon(1e-8));
        // eta(t) = |Q|^2/(M(0) M(t)) = 1.
        CHECK(std::norm(s.Q[i]) / (s.M0 * s.M[i]) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("released ground state reproduces the condensate closed form") {
    const double omega = units::Hz_to_rad_s(96.0);
    const double a0 = std::sqrt(hbar / (m_rb87 * omega));
    const double w = units::um_to_m(8.0);

    std::vector<double> times;
    for (int i = 1; i <= 6; ++i) times.push_back(4e-3 * i); // up to 24 ms

    const double spread =
        std::sqrt(a0 * a0 + (hbar * times.back() / (m_rb87 * a0)) *
                                (hbar * times.back() / (m_rb87 * a0)));
    const double extent = 8.0 * spread + 2.0 * w;
    const Grid1D grid = Grid1D::make(-extent, extent, 2048);
    StorageOperator R;
    R.waist = w;

    const GridState st = hermite_state(0, a0, grid);
    const OverlapSeries s = propagate_overlaps(st, R, nullptr, nullptr, times, m_rb87);
    CHECK(std::norm(s.Q[0] * 0.0 + std::complex<double>(s.M0, 0.0)) > 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double eta = std::norm(s.Q[i]) / (s.M0 * s.M[i]);
        CHECK(eta == doctest::Approx(eta_release_bec(times[i], a0, w, omega))
                         .epsilon(1e-3));
    }

    SUBCASE("t = 0: Q(0) = M(0), eta = 1") {
        const std::vector<double> t0 = {0.0};
        const OverlapSeries z =
            propagate_overlaps(st, R, nullptr, nullptr, t0, m_rb87);
        CHECK(std::abs(z.Q[0] - std::complex<double>(z.M0, 0.0)) < 1e-10);
        CHECK(std::norm(z.Q[0]) / (z.M0 * z.M[0]) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("efficiency is independent of the quantization box") {
        const Grid1D big = Grid1D::make(-2.0 * extent, 2.0 * extent, 4096);
        const GridState st2 = hermite_state(0, a0, big);
        const OverlapSeries s2 =
            propagate_overlaps(st2, R, nullptr, nullptr, times, m_rb87);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double eta1 = std::norm(s.Q[i]) / (s.M0 * s.M[i]);
            const double eta2 = std::norm(s2.Q[i]) / (s2.M0 * s2.M[i]);
            CHECK(eta1 == doctest::Approx(eta2).epsilon(1e-6));
        }
    }
}

TEST_CASE("thermal plane-wave ensemble reproduces the recoil Gaussian") {
    const double lambda_R = units::um_to_m(1.25);
    const double k_R = 2.0 * pi / lambda_R;
    const double sigma_v = std::sqrt(k_B * units::uK_to_K(2.0) / m_rb87);
    const double sigma_k = m_rb87 * sigma_v / hbar;
    const Grid1D grid = Grid1D::make(-16.0 * lambda_R, 16.0 * lambda_R, 1024);

    StorageOperator R;
    R.k_R = k_R;

    std::vector<double> times;
    for (int i = 0; i <= 8; ++i) times.push_back(units::us_to_s(30.0 * i / 8.0));

    const long j_max = static_cast<long>(std::ceil(5.0 * sigma_k / grid.dk));
    std::vector<OverlapSeries> series;
    std::vector<double> weights;
    for (long j = -j_max; j <= j_max; ++j) {
        const double k = static_cast<double>(j) * grid.dk;
        series.push_back(
            propagate_overlaps(plane_wave(grid, k), R, nullptr, nullptr, times, m_rb87));
        weights.push_back(std::exp(-k * k / (2.0 * sigma_k * sigma_k)));
    }
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& p : weights) p /= wsum;

    const ThermalEfficiency th = thermal_efficiency(series, weights);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double expect = eta_recoil(times[i], k_R, sigma_v);
        if (expect < 1e-3) continue;
        CHECK(th.curve.eta[i] == doctest::Approx(expect).epsilon(1e-3));
        // |C(t)/C(0)| = exp(-t^2/2 tau_R^2): the coherence decays at sqrt(2)
        // times the efficiency timescale.
        CHECK(std::abs(th.coherence.C[i] / th.coherence.C[0]) ==
              doctest::Approx(std::sqrt(expect)).epsilon(1e-3));
    }
}

TEST_CASE("Gibbs weights: tail bound and renormalization") {
    ThermalSpec spec;
    spec.omega = units::Hz_to_rad_s(96.0);
    spec.beta = 1.0 / (20.0 * hbar * spec.omega); // k_B T = 20 hbar omega
    spec.n_max = 40;

    SUBCASE("strict tail bound fails loudly and names the required level") {
        spec.tail_eps = 1e-6;
        CHECK_THROWS_AS((void)gibbs_weights(spec), NumericalError);
        try {
            (void)gibbs_weights(spec);
        } catch (const NumericalError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("n_max") != std::string::npos);
            CHECK(msg.find_first_of("0123456789") != std::string::npos);
        }
    }

    SUBCASE("renormalized truncation sums to one with Boltzmann ratios") {
        spec.renormalize_tail = true;
        const std::vector<double> wts = gibbs_weights(spec);
        REQUIRE(wts.size() == 41);
        const double sum = std::accumulate(wts.begin(), wts.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        const double q = std::exp(-spec.beta * hbar * spec.omega);
        CHECK(wts[1] / wts[0] == doctest::Approx(q).epsilon(1e-12));
        CHECK(wts[40] / wts[39] == doctest::Approx(q).epsilon(1e-12));
    }

    SUBCASE("a cold ladder passes the strict bound") {
        spec.beta = 1.0 / (2.0 * hbar * spec.omega);
        spec.tail_eps = 1e-6;
        const std::vector<double> wts = gibbs_weights(spec);
        const double sum = std::accumulate(wts.begin(), wts.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("closed-form free-expansion overlaps match the grid propagator") {
    const double omega = units::Hz_to_rad_s(96.0);
    const double a0 = std::sqrt(hbar / (m_rb87 * omega));
    const double w = 5.0 * a0;

    std::vector<double> times = {2e-4, 1e-3, 3e-3};
    const unsigned n_top = 20;
    const double k_top = std::sqrt(2.0 * n_top + 1.0) / a0;
    const double extent = 4.0 * a0 * std::sqrt(2.0 * n_top + 1.0) +
                          k_top * hbar * times.back() / m_rb87 + 2.0 * w;
    std::size_t points = 256;
    while ((2.0 * extent) / static_cast<double>(points) > pi / (1.5 * k_top))
        points *= 2;
    const Grid1D grid = Grid1D::make(-extent, extent, points);
    StorageOperator R;
    R.waist = w;

    for (unsigned n = 0; n <= n_top; ++n) {
        const GridState st = hermite_state(n, a0, grid);
        const OverlapSeries s =
            propagate_overlaps(st, R, nullptr, nullptr, times, m_rb87);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const HermiteOverlap h = hermite_release_closedform(
                n, times[i], a0, w, m_rb87, grid.length());
            // Compare L_x-free ratios; this is what enters the efficiency.
            CHECK(std::abs(h.Q / h.M0 - s.Q[i] / s.M0) < 1e-6);
            CHECK(h.M_t / h.M0 == doctest::Approx(s.M[i] / s.M0).epsilon(1e-6));
        }
    }

    SUBCASE("Q(t -> 0+) approaches M(0) for n <= 40") {
        const double t_small = 1e-7 / omega;
        for (unsigned n = 0; n <= 40; ++n) {
            const HermiteOverlap h =
                hermite_release_closedform(n, t_small, a0, w, m_rb87, 1.0);
            CHECK(std::abs(h.Q - std::complex<double>(h.M0, 0.0)) / h.M0 < 1e-8);
        }
    }

    SUBCASE("t = 0 is served by the dedicated M(0) expression") {
        CHECK_THROWS_AS(hermite_release_closedform(3, 0.0, a0, w, m_rb87, 1.0),
                        ConfigError);
    }
}

TEST_CASE("truncated thermal sum tracks the overlap approximation within 10%") {
    // k_B T / hbar omega = 20, w/a0 = 5, sums truncated at n = 40.
    const double omega = units::Hz_to_rad_s(96.0);
    const double a0 = std::sqrt(hbar / (m_rb87 * omega));
    const double w = 5.0 * a0;
    const double T = 20.0 * hbar * omega / k_B;
    const double sigma_v = std::sqrt(k_B * T / m_rb87);
    const double sigma_x = sigma_v / omega;
    const double tau_rel = release_thermal_tau(sigma_v, w, m_rb87).value;

    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(2.0 * tau_rel * i / 10.0);

    ThermalSpec spec;
    spec.beta = 1.0 / (k_B * T);
    spec.omega = omega;
    spec.n_max = 40;
    spec.renormalize_tail = true;
    const std::vector<double> weights = gibbs_weights(spec);

    const double k_top = std::sqrt(81.0) / a0;
    const double extent = 4.0 * a0 * std::sqrt(81.0) +
                          k_top * hbar * times.back() / m_rb87 + 2.0 * w;
    std::size_t points = 256;
    while ((2.0 * extent) / static_cast<double>(points) > pi / (1.5 * k_top))
        points *= 2;
    const Grid1D grid = Grid1D::make(-extent, extent, points);
    StorageOperator R;
    R.waist = w;

    std::vector<OverlapSeries> series;
    for (unsigned n = 0; n <= 40; ++n)
        series.push_back(propagate_overlaps(hermite_state(n, a0, grid), R, nullptr,
                                            nullptr, times, m_rb87));
    const ThermalEfficiency th = thermal_efficiency(series, weights);

    double max_dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double approx =
            eta_release_thermal(times[i], sigma_x, sigma_v, w, m_rb87, 1);
        max_dev = std::max(max_dev, std::abs(approx - th.curve.eta[i]));
    }
    // Deviation as a fraction of the initial (peak) efficiency eta(0) = 1.
    CHECK(max_dev < 0.10);
}

TEST_CASE("exact two-oscillator overlap sum") {
    const double omega_g = units::Hz_to_rad_s(96.0);
    const double a_g = std::sqrt(hbar / (m_rb87 * omega_g));

    SUBCASE("equal traps: |C(t)| = 1 for all t") {
        std::vector<double> times = {0.0, 0.3 / omega_g, 4.0 / omega_g};
        const double beta = 1.0 / (5.0 * hbar * omega_g);
        const KuhrExactResult r = kuhr_exact(beta, omega_g, omega_g, m_rb87, 120,
                                             times, KuhrMethod::GridOverlap);
        for (const auto& c : r.C) CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-8));
    }

    SUBCASE("odd-parity overlaps vanish") {
        const double a_r = 1.3 * a_g;
        const Grid1D grid = Grid1D::make(-40.0 * a_r, 40.0 * a_r, 2048);
        for (auto [n, np] : std::vector<std::pair<unsigned, unsigned>>{
                 {0, 1}, {1, 2}, {2, 5}, {4, 7}}) {
            const GridState g = hermite_state(n, a_g, grid);
            const GridState r = hermite_state(np, a_r, grid);
            CHECK(std::abs(inner_product_real(g, r)) < 1e-10);
        }
    }

    SUBCASE("inside the intermediate-temperature window the Kuhr form holds") {
        const double kappa_g = m_rb87 * omega_g * omega_g;
        const double kappa_r = 0.999 * kappa_g;
        const double omega_r = std::sqrt(kappa_r / m_rb87);
        const double beta = 0.05 / (hbar * omega_g); // k_B T = 20 hbar omega
        const double K = beta * hbar * omega_g / (omega_g - omega_r);

        std::vector<double> times;
        for (double f : {0.2, 0.5, 0.8, 1.0}) times.push_back(f * K);
        const KuhrExactResult ex = kuhr_exact(beta, omega_g, omega_r, m_rb87, 190,
                                              times, KuhrMethod::GridOverlap);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double kuhr_1d =
                1.0 / std::sqrt(1.0 + times[i] * times[i] / (K * K));
            CHECK(std::abs(ex.C[i]) == doctest::Approx(kuhr_1d).epsilon(0.05));
        }

        SUBCASE("the published perturbative overlaps agree with the grid") {
            const KuhrExactResult pe = kuhr_exact(beta, omega_g, omega_r, m_rb87,
                                                  190, times, KuhrMethod::Perturbative);
            for (std::size_t i = 0; i < times.size(); ++i)
                CHECK(std::abs(pe.C[i]) ==
                      doctest::Approx(std::abs(ex.C[i])).epsilon(5e-3));
        }
    }

    SUBCASE("outside the window the coherence collapses and revives") {
        const double kappa_r = 0.5 * m_rb87 * omega_g * omega_g;
        const double omega_r = std::sqrt(kappa_r / m_rb87);
        const double beta = 1.0 / (hbar * omega_g); // cold: discrete ladder
        const double period = 2.0 * pi / omega_r;
        std::vector<double> times;
        for (int i = 1; i <= 80; ++i) times.push_back(3.0 * period * i / 80.0);
        const KuhrExactResult r = kuhr_exact(beta, omega_g, omega_r, m_rb87, 30,
                                             times, KuhrMethod::GridOverlap);
        // The collapse bottoms out near 1.24 periods; a partial revival close
        // to full contrast follows near 2.44 periods.
        double lo = 1.0, hi_after = 0.0;
        std::size_t i_lo = 0;
        for (std::size_t i = 0; i < times.size() / 2; ++i)
            if (std::abs(r.C[i]) < lo) { lo = std::abs(r.C[i]); i_lo = i; }
        for (std::size_t i = i_lo; i < times.size(); ++i)
            hi_after = std::max(hi_after, std::abs(r.C[i]));
        CHECK(lo < 0.6);       // collapse
        CHECK(hi_after > 0.9); // revival after the collapse
    }
}
