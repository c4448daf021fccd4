#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "stefan/errors.hpp"

namespace stefan {

// Dense storage for a tridiagonal system: lower[i] multiplies x[i-1] in row i,
// upper[i] multiplies x[i+1].  lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const { return diag.size(); }
};

// Thomas algorithm.  Safe only for diagonally dominant systems (the implicit
// diffusion matrices here are M-matrices, so that holds).
inline std::vector<double> solve_thomas(const Tridiagonal& m, std::vector<double> rhs) {
    const std::size_t n = m.size();
    if (rhs.size() != n) throw std::invalid_argument("solve_thomas: size mismatch");
    std::vector<double> c(n);
    c[0] = m.upper[0] / m.diag[0];
    rhs[0] /= m.diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double w = m.diag[i] - m.lower[i] * c[i - 1];
        c[i] = (i + 1 < n) ? m.upper[i] / w : 0.0;
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / w;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

// Gaussian elimination with partial pivoting for tridiagonal systems
// (fill-in limited to a second superdiagonal).  Used where the matrix can be
// nearly singular, e.g. inverse iteration and Newton steps far from the
// solution.
inline std::vector<double> solve_pivoting(const Tridiagonal& m, std::vector<double> rhs) {
    const std::size_t n = m.size();
    if (rhs.size() != n) throw std::invalid_argument("solve_pivoting: size mismatch");
    std::vector<double> d(m.diag), u1(n, 0.0), u2(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) u1[i] = m.upper[i];
    std::vector<double> low(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) low[i] = m.lower[i];

    for (std::size_t i = 0; i + 1 < n; ++i) {
        double piv = d[i];
        double below = low[i + 1];
        if (std::abs(below) > std::abs(piv)) {
            std::swap(d[i], low[i + 1]);
            // after the swap the old row i holds (below, d[i+1], u1[i+1]);
            // express the exchange on the stored bands
            std::swap(u1[i], d[i + 1]);
            std::swap(u2[i], u1[i + 1]);
            std::swap(rhs[i], rhs[i + 1]);
            piv = d[i];
        }
        if (piv == 0.0) piv = std::numeric_limits<double>::min();
        const double f = low[i + 1] / piv;
        low[i + 1] = 0.0;
        d[i + 1] -= f * u1[i];
        u1[i + 1] -= f * u2[i];
        rhs[i + 1] -= f * rhs[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        if (i + 1 < n) s -= u1[i] * rhs[i + 1];
        if (i + 2 < n) s -= u2[i] * rhs[i + 2];
        double piv = d[i];
        if (piv == 0.0) piv = std::numeric_limits<double>::min();
        rhs[i] = s / piv;
    }
    return rhs;
}

// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
// below sigma, via the Sturm sequence of leading principal minors.
// offsq[i] = off[i]^2 couples rows i and i+1.
inline std::size_t sturm_count_below(const std::vector<double>& diag,
                                     const std::vector<double>& offsq, double sigma) {
    std::size_t count = 0;
    double q = 1.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double num = diag[i] - sigma;
        if (i > 0) num -= offsq[i - 1] / q;
        q = num;
        if (q < 0.0) ++count;
        if (std::abs(q) < tiny) q = (q < 0.0 ? -tiny : tiny);
    }
    return count;
}

// Smallest eigenvalue of the symmetric tridiagonal (diag, off) by bisection
// on the Sturm count.  Bracketed by Gershgorin discs; bisected essentially
// to machine precision relative to the matrix scale.
inline double smallest_eigenvalue(const std::vector<double>& diag,
                                  const std::vector<double>& off) {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("smallest_eigenvalue: empty matrix");
    std::vector<double> offsq(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) offsq[i] = off[i] * off[i];

    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    for (int it = 0; it < 200 && hi - lo > 1e-14 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count_below(diag, offsq, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Inverse iteration for the eigenvector of a (possibly unsymmetric)
// tridiagonal matrix at an eigenvalue estimate.  Returns the vector scaled
// to unit max norm with positive orientation.
inline std::vector<double> inverse_iteration(const Tridiagonal& m, double lambda,
                                             int iterations = 4) {
    const std::size_t n = m.size();
    Tridiagonal shifted = m;
    // nudge off the exact eigenvalue so the factorization stays finite
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(m.diag[i]));
    const double shift = lambda + 1e-12 * std::max(1.0, scale);
    for (std::size_t i = 0; i < n; ++i) shifted.diag[i] = m.diag[i] - shift;

    std::vector<double> v(n, 1.0);
    for (int it = 0; it < iterations; ++it) {
        v = solve_pivoting(shifted, std::move(v));
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        if (!(vmax > 0.0) || !std::isfinite(vmax))
            throw NumericalError("inverse_iteration: iterate collapsed");
        for (double& x : v) x /= vmax;
    }
    // orient so the largest-magnitude entry is positive
    double extreme = 0.0;
    for (double x : v)
        if (std::abs(x) > std::abs(extreme)) extreme = x;
    if (extreme < 0.0)
        for (double& x : v) x = -x;
    return v;
}

}  // namespace stefan
