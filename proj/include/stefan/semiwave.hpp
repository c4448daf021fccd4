#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stefan/errors.hpp"
#include "stefan/tridiag.hpp"

namespace stefan {

// Semi-wave profiles: for a wave speed k >= 0 and carrying capacity c > 0,
// the unique increasing solution of
//
//   -d w'' + k w' = w (c - w),   w(0) = 0,   w(x) -> c as x -> infinity,
//
// solved on a truncation [0, L] with w(L) = c pinned.  The boundary slope
// w'(0) drives the free-boundary spreading speed: the asymptotic speed k0 is
// the unique root of  mu w_k'(0) = k,  found by bisection below the
// classical threshold 2 sqrt(d c) past which no semi-wave exists.

struct SemiWaveResult {
    double k = 0.0;
    double c = 0.0;
    double d = 0.0;
    double l_trunc = 0.0;
    std::vector<double> profile;  // nodes j*L/n
    double slope0 = 0.0;          // one-sided second-order w'(0)
    double ode_residual = 0.0;    // max-norm defect of the discrete BVP
};

// Fraction of c the profile must reach at 3/4 of the truncation; falling
// short means the plateau was cut off and L has to grow.
inline constexpr double kTolPlateau = 1e-4;

inline SemiWaveResult solve_semiwave(double k, double c, double d, double l_trunc = 0.0,
                                     std::size_t grid_n = 0) {
    if (!(c > 0.0)) throw std::invalid_argument("solve_semiwave: c must be positive");
    if (!(d > 0.0)) throw std::invalid_argument("solve_semiwave: d must be positive");
    if (k < 0.0) throw std::invalid_argument("solve_semiwave: k must be nonnegative");
    if (l_trunc <= 0.0) l_trunc = 40.0 * std::sqrt(d / c);
    if (grid_n == 0)
        grid_n = static_cast<std::size_t>(
            std::clamp(l_trunc / (0.01 * std::sqrt(d / c)), 512.0, 20000.0));

    const std::size_t n = grid_n;
    const double dx = l_trunc / static_cast<double>(n);
    const double wd = d / (dx * dx);
    const double wk = k / (2.0 * dx);

    // rising-front initial guess with the right length scale
    std::vector<double> u(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = dx * static_cast<double>(j);
        u[j] = c * std::tanh(x * std::sqrt(c / (2.0 * d)));
    }
    u[0] = 0.0;
    u[n] = c;

    auto residual = [&](const std::vector<double>& v, std::vector<double>& f) {
        f.assign(n - 1, 0.0);
        for (std::size_t j = 1; j < n; ++j)
            f[j - 1] = wd * (2.0 * v[j] - v[j - 1] - v[j + 1]) +
                       wk * (v[j + 1] - v[j - 1]) - v[j] * (c - v[j]);
    };

    std::vector<double> f;
    residual(u, f);
    double fnorm = 0.0;
    for (double v : f) fnorm = std::max(fnorm, std::abs(v));
    const double tol = 1e-10 * c * (1.0 + wd / c);

    for (int it = 0; it < 100 && fnorm > tol; ++it) {
        Tridiagonal jac;
        jac.lower.assign(n - 1, -wd - wk);
        jac.diag.assign(n - 1, 0.0);
        jac.upper.assign(n - 1, -wd + wk);
        for (std::size_t j = 1; j < n; ++j) jac.diag[j - 1] = 2.0 * wd - c + 2.0 * u[j];

        std::vector<double> rhs(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) rhs[i] = -f[i];
        std::vector<double> delta = solve_pivoting(jac, std::move(rhs));

        double lambda = 1.0;
        bool improved = false;
        for (int back = 0; back < 50; ++back) {
            std::vector<double> trial = u;
            for (std::size_t j = 1; j < n; ++j) trial[j] += lambda * delta[j - 1];
            residual(trial, f);
            double fn = 0.0;
            for (double v : f) fn = std::max(fn, std::abs(v));
            if (fn < fnorm * (1.0 - 0.25 * lambda)) {
                u = std::move(trial);
                fnorm = fn;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved)
            throw NewtonStalled("solve_semiwave: Newton stalled before meeting tolerance");
    }
    if (fnorm > tol)
        throw NewtonStalled("solve_semiwave: Newton ran out of iterations");

    // plateau check at 3/4 L
    const std::size_t j34 = (3 * n) / 4;
    if (std::abs(u[j34] - c) > kTolPlateau * c)
        throw TruncationTooShort("solve_semiwave: far-field plateau not reached", l_trunc);

    SemiWaveResult res;
    res.k = k;
    res.c = c;
    res.d = d;
    res.l_trunc = l_trunc;
    res.slope0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
    res.ode_residual = fnorm;
    res.profile = std::move(u);
    return res;
}

struct K0Result {
    double k0 = 0.0;
    double slope0 = 0.0;     // w'(0) of the semi-wave at k0
    double residual = 0.0;   // mu*slope0 - k0 at the returned root
    double l_trunc = 0.0;    // truncation that finally held its plateau
    int evaluations = 0;
};

// Unique root of g(k) = mu w_k'(0) - k.  g(0) > 0 and g is strictly
// decreasing, so bisection against the subcritical cap converges without
// ever evaluating at the cap itself (important: the profile degenerates
// there and would need an enormous truncation).
inline K0Result find_k0(double mu, double c, double d) {
    if (!(mu > 0.0)) throw std::invalid_argument("find_k0: mu must be positive");
    const double k_cap = 2.0 * std::sqrt(d * c) * (1.0 - 1e-6);
    double l_trunc = 40.0 * std::sqrt(d / c);

    K0Result out;
    auto g = [&](double k, double& slope) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            try {
                SemiWaveResult r = solve_semiwave(k, c, d, l_trunc);
                ++out.evaluations;
                slope = r.slope0;
                return mu * slope - k;
            } catch (const TruncationTooShort&) {
                l_trunc *= 2.0;  // profile too stretched; give it more room
            }
        }
        throw NumericalError("find_k0: truncation kept failing its plateau check");
    };

    double slope_lo = 0.0;
    double g_lo = g(0.0, slope_lo);
    if (!(g_lo > 0.0))
        throw NumericalError("find_k0: g(0) = mu w'(0) must be positive");

    double lo = 0.0, hi = k_cap;
    double slope_at_root = slope_lo;
    const double width_tol = 1e-6 * 2.0 * std::sqrt(d * c);
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        double slope_mid = 0.0;
        const double g_mid = g(mid, slope_mid);
        if (g_mid > 0.0) {
            lo = mid;
            slope_at_root = slope_mid;
        } else {
            hi = mid;
        }
    }
    out.k0 = 0.5 * (lo + hi);
    out.slope0 = slope_at_root;
    out.residual = mu * slope_at_root - out.k0;
    out.l_trunc = l_trunc;
    return out;
}

// Two-sided spreading-speed band from far-field growth bounds m1 <= m2:
// the asymptotic speed of any front in such a habitat lies between the
// homogeneous speeds at the two levels.
struct SpeedBounds {
    double k_low = 0.0;
    double k_high = 0.0;
};

inline SpeedBounds speed_bounds(double mu, double m1, double m2, double d) {
    if (!(m1 > 0.0) || !(m2 >= m1))
        throw std::invalid_argument("speed_bounds: need 0 < m1 <= m2");
    SpeedBounds b;
    b.k_low = find_k0(mu, m1, d).k0;
    b.k_high = find_k0(mu, m2, d).k0;
    return b;
}

}  // namespace stefan
