// oracle.hpp - first-principles numerical oracles: a 1d split-operator
// Schrodinger propagator computing storage-overlap functions Q_n(t), M_n(t)
// for arbitrary potentials, the Hermite-basis closed-form free-expansion
// oracle, and the exact two-oscillator overlap sum.
#pragma once

#include "spinwave/types.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace spinwave {

struct Grid1D {
    double x_min = 0.0, x_max = 0.0; // m
    std::size_t points = 0;          // power of two, >= 256
    double dx = 0.0;                 // m
    double dk = 0.0;                 // 1/m, 2 pi / (points * dx)

    static Grid1D make(double x_min, double x_max, std::size_t points);

    double length() const { return x_max - x_min; } // quantization length L_x
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    // Wavenumber of FFT bin i (standard wrap-around ordering).
    double k(std::size_t i) const;
};

struct GridState {
    Grid1D grid;
    std::vector<std::complex<double>> psi;

    double norm_sq() const; // integral |psi|^2 dx
};

// Storage operator R^dag: multiplication by sqrt(L_x) v(x) with
// v(x) = e^{i k_R x} / sqrt(L_x) (plane wave; unitary) or
// v(x) = e^{i k_R x} e^{-x^2/w^2} (2/(pi w^2))^{1/4} (Gaussian envelope).
struct StorageOperator {
    double k_R = 0.0;            // 1/m
    std::optional<double> waist; // m; absent = plane wave

    // sqrt(L_x) v(x)
    std::complex<double> amplitude(double x, double L_x) const;
    // L_x |v(x)|^2
    double weight(double x, double L_x) const;
};

using Potential = std::function<double(double)>; // V(x) in J; nullptr = free

struct PropagationOptions {
    double dt = 0.0;         // s; 0 = choose automatically
    double k_occupied = 0.0; // 1/m; occupied bandwidth estimate; 0 = from spectra
};

struct OverlapSeries {
    std::vector<double> times;             // s
    std::vector<std::complex<double>> Q;   // Q(t)
    std::vector<double> M;                 // M(t)
    double M0 = 0.0;                       // M(0)
};

// Evolves |psi_g(t)> under V_g and U_r(t) R^dag |psi(0)> under V_r with Strang
// splitting and returns Q(t) = <psi_g(t)| R U_r(t) R^dag |psi_g(0)>,
// M(t) = <psi_g(t)| R R^dag |psi_g(t)>, and M(0). Times must be ascending.
// Throws NumericalError if the norm drifts by more than 1e-6.
OverlapSeries propagate_overlaps(const GridState& initial, const StorageOperator& R,
                                 const Potential& V_g, const Potential& V_r,
                                 const std::vector<double>& times, double mass,
                                 const PropagationOptions& opt = {});

// Gibbs occupation weights p_n for an oscillator ladder.
struct ThermalSpec {
    double beta = 0.0;          // 1/J
    double omega = 0.0;         // rad/s
    std::size_t n_max = 0;      // highest retained level
    double tail_eps = 1e-6;     // required bound on the discarded weight
    bool renormalize_tail = false; // renormalize over 0..n_max instead
};

// Throws NumericalError naming the required n_max if the tail bound fails
// (unless renormalize_tail is set).
std::vector<double> gibbs_weights(const ThermalSpec& spec);

// Thermal average over per-state overlap series (arbitrary weights):
// C = sum w_n Q_n, mu = sum w_n M_n, eta/eta0 = |C|^2/(mu(0) mu(t)).
struct ThermalEfficiency {
    CoherenceSeries coherence;
    DecayCurve curve;
};
ThermalEfficiency thermal_efficiency(const std::vector<OverlapSeries>& per_state,
                                     const std::vector<double>& weights);

// Normalized harmonic-oscillator eigenstate n with oscillator length a0,
// evaluated by stable upward recurrence on normalized Hermite functions.
// Throws ConfigError if the grid does not span >= 4 classical turning points
// on each side.
GridState hermite_state(unsigned n, double a0, const Grid1D& grid);

// Closed-form free-expansion overlaps for the oscillator eigenstate n stored
// with a Gaussian beam of waist w (log-scaled Hermite coefficient arithmetic;
// stable for n <= 40). L_x is the quantization length used by the comparison
// grid. Requires t > 0 for Q and M_t (use M0 at t = 0; Q(0) = M(0)).
struct HermiteOverlap {
    std::complex<double> Q;
    double M_t = 0.0;
    double M0 = 0.0;
};
HermiteOverlap hermite_release_closedform(unsigned n, double t, double a0,
                                          double w, double mass, double L_x);

// Exact coherence for R = identity and two harmonic traps (frequencies
// omega_g, omega_r): C(t) = C0 (1-q) sum_{n,n'} q^n e^{i t (omega_g n -
// omega_r n')} |<phi_{a_g,n}|phi_{a_r,n'}>|^2 with C0 = e^{i t (omega_g -
// omega_r)/2}. Overlaps by grid quadrature or by the second-order expansion
// in da = a_r - a_g.
enum class KuhrMethod { GridOverlap, Perturbative };

struct KuhrExactResult {
    std::vector<double> times;
    std::vector<std::complex<double>> C;
    std::vector<std::string> warnings;
};
KuhrExactResult kuhr_exact(double beta, double omega_g, double omega_r,
                           double mass, std::size_t n_max,
                           const std::vector<double>& times, KuhrMethod method,
                           double tail_eps = 1e-4);

} // namespace spinwave
