// oracle_hermite.cpp - closed-form storage overlaps Q_n(t), M_n(t), M_n(0)
// for a harmonic-oscillator eigenstate released into free flight and read out
// through a Gaussian mode. The published nested Hermite-coefficient sums are
// replaced by the equivalent Mehler generating-function recurrences, which
// are cancellation-free and remain accurate at arbitrary n.
#include "spinwave/oracle.hpp"

#include "spinwave/constants.hpp"

#include <cmath>
#include <complex>

namespace spinwave {

namespace {

constexpr double pi = constants::pi;
using cld = std::complex<long double>;

// The overlap reduces to prefactor * B/sqrt(xi1 xi5) * S_n with
//   S_n = xi3^n/(2^n n!) sum_{r,s} g_{n,r,s} xi4^r / xi5^{(r+s)/2},
// where the double sum is the Hermite expansion of the cross integral
// I_n(a,b,c) = int e^{-a u^2} H_n(bu) H_n(cu) du at (a,b,c) = (xi5, xi4, 1):
//   sum_n s^n I_n/(2^n n!) = sqrt(pi) [a - 2bc s + (b^2+c^2-a) s^2]^{-1/2}.
// Expanding that generating function (with the extra xi3^n absorbed into s)
// yields S_n = sqrt(xi5) h_n where the h_n satisfy the three-term recurrence
//   A (n+1) h_{n+1} = B (n+1/2) h_n + C n h_{n-1},  h_0 = A^{-1/2},
//   A = xi5, B = 2 xi3 xi4, C = xi3^2 (xi5 - xi4^2 - 1).
// The Taylor coefficients of the generating function are the recurrence's
// dominant solution (set by its nearest singularity), so forward iteration is
// stable for every n. The literal double sum alternates in sign and loses all
// significance around n = 30 when the beam is much wider than the state.
// Note xi3 never appears alone: xi3 xi4 = B^2/xi1 and
// xi3^2 = 1 - 1/xi1 exactly, so no square-root branch is needed.
std::complex<double> overlap_from_xi(unsigned n, long double B_re, cld xi1,
                                     cld extra5, double prefactor_real) {
    const cld B(B_re, 0.0L);
    // conj(xi1) - B^4/xi1 = (|xi1|^2 - B^4)/xi1; with xi1 = 1/2 + B^2 + i q
    // the numerator is 1/4 + B^2 + q^2 exactly, which avoids differencing two
    // O(B^4) quantities as t -> 0 (where B ~ 1/t diverges).
    const long double q = xi1.imag();
    const cld xi5 =
        cld(0.25L + B_re * B_re + q * q, 0.0L) / xi1 + extra5;

    const cld A = xi5;
    const cld Bc = 2.0L * B * B / xi1;
    const cld xi3_sq = 1.0L - 1.0L / xi1;
    const cld xi4xi3_sq = (B * B / xi1) * (B * B / xi1); // (xi3 xi4)^2
    const cld Cc = xi3_sq * (xi5 - 1.0L) - xi4xi3_sq;

    cld h_prev = 0.0L;
    cld h = 1.0L / std::sqrt(A);
    for (unsigned m = 0; m < n; ++m) {
        const cld h_next = (Bc * (static_cast<long double>(m) + 0.5L) * h +
                            Cc * static_cast<long double>(m) * h_prev) /
                           (A * (static_cast<long double>(m) + 1.0L));
        h_prev = h;
        h = h_next;
    }

    // prefactor * B/sqrt(xi1 xi5) * sqrt(xi5) * h_n = prefactor * B h_n/sqrt(xi1)
    const cld result =
        static_cast<long double>(prefactor_real) * B * h / std::sqrt(xi1);
    return {static_cast<double>(result.real()), static_cast<double>(result.imag())};
}

} // namespace

HermiteOverlap hermite_release_closedform(unsigned n, double t, double a0,
                                          double w, double mass, double L_x) {
    if (a0 <= 0.0 || w <= 0.0 || mass <= 0.0 || L_x <= 0.0)
        throw ConfigError("hermite_release_closedform: a0, w, mass, L_x must be > 0");
    if (t <= 0.0)
        throw ConfigError("hermite_release_closedform: t must be > 0 (use M0 at t = 0)");

    const double v0_sq = std::sqrt(2.0 / (pi * w * w)); // peak |v|^2 of the mode
    const double lead = L_x * v0_sq;

    const long double A = static_cast<long double>(constants::hbar) * t / mass;
    const long double ia_term = static_cast<long double>(a0) * a0 / (2.0L * A);

    HermiteOverlap out;

    // Q_n(t): B = a0 w / 2A, xi5 gains the +a0^2/w^2 readout term.
    {
        const long double B = static_cast<long double>(a0) * w / (2.0L * A);
        const cld xi1 = cld(0.5L + B * B, ia_term);
        const cld extra(static_cast<long double>(a0) * a0 / (static_cast<long double>(w) * w), 0.0L);
        out.Q = overlap_from_xi(n, B, xi1, extra, lead);
    }

    // M_n(t): B -> a0 w / (2 sqrt2 A), no readout term in xi5; real by symmetry.
    {
        const long double B =
            static_cast<long double>(a0) * w / (2.0L * std::sqrt(2.0L) * A);
        const cld xi1 = cld(0.5L + B * B, ia_term);
        out.M_t = overlap_from_xi(n, B, xi1, cld(0.0L, 0.0L), lead).real();
    }

    // M_n(0) = L_x v0^2 g_n where g_n is the coefficient of s^n in the Mehler
    // generating function
    //   sum_n g_n s^n = [(1+a) - 2s - (a-1)s^2]^{-1/2},  a = 2 a0^2/w^2,
    // obtained from sum_n s^n H_n(u)^2/(2^n n!) = (1-s^2)^{-1/2}
    // exp(2 s u^2/(1+s)) integrated against e^{-(1+a)u^2}/sqrt(pi). The g_n
    // satisfy (1+a)(n+1) g_{n+1} = (2n+1) g_n + (a-1) n g_{n-1}; the wanted
    // solution is the dominant one (singularity at s = 1), so the forward
    // recurrence is stable for every n and every a > 0. The direct expansion
    // of the overlap integral in Hermite coefficients alternates in sign and
    // loses all significance near a -> 0 already for n around 30.
    {
        const long double a =
            2.0L * static_cast<long double>(a0) * a0 /
            (static_cast<long double>(w) * w);
        long double g_prev = 0.0L;                    // g_{-1}
        long double g = 1.0L / std::sqrt(1.0L + a);   // g_0
        for (unsigned m = 0; m < n; ++m) {
            const long double g_next =
                ((2.0L * m + 1.0L) * g + (a - 1.0L) * m * g_prev) /
                ((1.0L + a) * (m + 1.0L));
            g_prev = g;
            g = g_next;
        }
        out.M0 = static_cast<double>(static_cast<long double>(lead) * g);
    }

    return out;
}

} // namespace spinwave
