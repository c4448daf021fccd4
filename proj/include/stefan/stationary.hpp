#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan/boundary.hpp"
#include "stefan/eigen.hpp"
#include "stefan/errors.hpp"
#include "stefan/growth.hpp"
#include "stefan/tridiag.hpp"

namespace stefan {

// Positive equilibria of  -d u'' = u (m(x) - u)  with B[u](0) = 0 and
// u(ell) = 0, and their half-line limit obtained by exhausting ever longer
// truncations.  A positive solution exists exactly when lambda1(ell) < 0;
// the solver reports the eigenvalue it saw either way.

struct StationarySolution {
    double ell = 0.0;                // domain length actually solved on
    std::vector<double> values;      // nodes j*ell/n
    double residual = 0.0;           // max-norm defect of the discrete system
    bool half_line = false;          // true when produced by exhaustion
    double observation_length = 0.0; // half-line: window certified Cauchy-stable

    double dx() const { return ell / static_cast<double>(values.size() - 1); }
    double min_interior() const {
        double v = values[1];
        for (std::size_t j = 1; j + 1 < values.size(); ++j) v = std::min(v, values[j]);
        return v;
    }
};

struct IntervalSolve {
    std::optional<StationarySolution> solution;  // empty: no positive solution
    double lambda1 = 0.0;
};

namespace detail {

// Discrete residual F(u) of the interval problem; unknowns are the interior
// nodes plus node 0 for Robin data.  u holds all n+1 nodes; u[n] = 0.
inline void stationary_residual(const std::vector<double>& u, double ell, double d,
                                const GrowthProfile& m, const BoundaryOperator& bc,
                                std::vector<double>& f) {
    const std::size_t n = u.size() - 1;
    const double dx = ell / static_cast<double>(n);
    const double w = d / (dx * dx);
    const bool robin = !bc.is_dirichlet();
    const std::size_t rows = robin ? n : n - 1;
    f.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t j = robin ? r : r + 1;
        const double x = dx * static_cast<double>(j);
        if (robin && j == 0) {
            const double g = 2.0 * dx * bc.alpha() / bc.beta();
            f[r] = w * ((2.0 + g) * u[0] - 2.0 * u[1]) - u[0] * (m(0.0) - u[0]);
        } else {
            f[r] = w * (2.0 * u[j] - u[j - 1] - u[j + 1]) - u[j] * (m(x) - u[j]);
        }
    }
}

inline double max_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline Tridiagonal stationary_jacobian(const std::vector<double>& u, double ell, double d,
                                       const GrowthProfile& m, const BoundaryOperator& bc) {
    const std::size_t n = u.size() - 1;
    const double dx = ell / static_cast<double>(n);
    const double w = d / (dx * dx);
    const bool robin = !bc.is_dirichlet();
    const std::size_t rows = robin ? n : n - 1;
    Tridiagonal jac;
    jac.lower.assign(rows, 0.0);
    jac.diag.assign(rows, 0.0);
    jac.upper.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t j = robin ? r : r + 1;
        const double x = dx * static_cast<double>(j);
        if (robin && j == 0) {
            const double g = 2.0 * dx * bc.alpha() / bc.beta();
            jac.diag[r] = w * (2.0 + g) - m(0.0) + 2.0 * u[0];
            jac.upper[r] = -2.0 * w;
        } else {
            jac.lower[r] = -w;
            jac.diag[r] = 2.0 * w - m(x) + 2.0 * u[j];
            jac.upper[r] = -w;
        }
    }
    return jac;
}

// Monotone fixed-point sweep: shift the reaction so it becomes increasing on
// [0, sup m], then iterate (-d D^2 + K) u_new = K u + u (m - u).  Started
// from a subsolution this climbs to the minimal positive equilibrium.
inline std::vector<double> picard_sweep(std::vector<double> u, double ell, double d,
                                        const GrowthProfile& m, const BoundaryOperator& bc,
                                        double tol) {
    const std::size_t n = u.size() - 1;
    const double dx = ell / static_cast<double>(n);
    const double w = d / (dx * dx);
    const bool robin = !bc.is_dirichlet();
    const std::size_t rows = robin ? n : n - 1;
    const double k_shift =
        2.0 * std::max(m.sup_bound(), 0.0) - std::min(m.inf_bound(), 0.0) + 1.0;

    Tridiagonal a;
    a.lower.assign(rows, 0.0);
    a.diag.assign(rows, 0.0);
    a.upper.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t j = robin ? r : r + 1;
        if (robin && j == 0) {
            const double g = 2.0 * dx * bc.alpha() / bc.beta();
            a.diag[r] = w * (2.0 + g) + k_shift;
            a.upper[r] = -2.0 * w;
        } else {
            a.lower[r] = -w;
            a.diag[r] = 2.0 * w + k_shift;
            a.upper[r] = -w;
        }
    }

    std::vector<double> rhs(rows);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t j = robin ? r : r + 1;
            const double x = dx * static_cast<double>(j);
            rhs[r] = k_shift * u[j] + u[j] * (m(x) - u[j]);
        }
        std::vector<double> unew = solve_thomas(a, rhs);
        double delta = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t j = robin ? r : r + 1;
            delta = std::max(delta, std::abs(unew[r] - u[j]));
            u[j] = unew[r];
        }
        if (delta < tol) return u;
    }
    throw NotConverged("stationary solver: monotone iteration did not converge");
}

}  // namespace detail

// Interval problem on [0, ell].  grid_n counts intervals; the solution is
// reported on the n+1 node grid.  Damped Newton runs between the ordered
// barriers eps*phi (below) and the constant sup m (above), with the monotone
// sweep as fallback when Newton stalls.  A warm start, when given, replaces
// the midpoint initial iterate; the uniqueness of the positive equilibrium
// means every admissible start must land on the same solution.
inline IntervalSolve solve_interval(double ell, double d, const GrowthProfile& m,
                                    const BoundaryOperator& bc, std::size_t grid_n = 512,
                                    const std::vector<double>* warm_start = nullptr) {
    if (!(ell > 0.0)) throw std::invalid_argument("solve_interval: ell must be positive");
    if (grid_n < 16) throw std::invalid_argument("solve_interval: grid too coarse");
    if (warm_start && warm_start->size() != grid_n + 1)
        throw std::invalid_argument("solve_interval: warm start has the wrong node count");

    IntervalSolve out;
    const EigenResult eig =
        principal_eigenvalue(ell, d, m, bc, std::min<std::size_t>(grid_n, 512));
    out.lambda1 = eig.lambda1;
    if (out.lambda1 >= 0.0) return out;  // only the trivial equilibrium exists

    const std::size_t n = grid_n;
    const double sup_m = m.sup_bound();
    // stopping rule scales with the diffusion operator norm d/dx^2; the
    // 1e-12 factor keeps converged states from different starts within 1e-8
    // of each other while staying well above the double-precision floor
    const double tol =
        1e-12 * sup_m * (1.0 + d / (ell * ell / static_cast<double>(n * n)));

    // lower barrier eps*phi is a subsolution when eps <= |lambda1| / max phi
    const double eps = std::min(0.9 * std::abs(out.lambda1), sup_m);
    const MonotoneCubic phi_interp(0.0, ell, eig.phi);
    std::vector<double> lower(n + 1), u(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = ell * static_cast<double>(j) / static_cast<double>(n);
        lower[j] = eps * std::max(phi_interp(x), 0.0);
        // warm starts are clipped to the subsolution barrier: the zero state
        // solves the discrete system too, and an iterate that begins below
        // the barrier can fall into its basin instead of the positive root
        u[j] = warm_start ? std::max((*warm_start)[j], lower[j])
                          : 0.5 * (lower[j] + sup_m);  // default: midway between barriers
    }
    u[n] = 0.0;
    if (bc.is_dirichlet()) u[0] = 0.0;

    const bool robin = !bc.is_dirichlet();
    std::vector<double> f;
    bool newton_done = false;
    detail::stationary_residual(u, ell, d, m, bc, f);
    double fnorm = detail::max_abs(f);
    for (int it = 0; it < 80 && !newton_done; ++it) {
        if (fnorm <= tol) {
            newton_done = true;
            break;
        }
        Tridiagonal jac = detail::stationary_jacobian(u, ell, d, m, bc);
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        std::vector<double> delta = solve_pivoting(jac, std::move(rhs));

        double lambda = 1.0;
        bool improved = false;
        for (int back = 0; back < 40; ++back) {
            std::vector<double> trial = u;
            for (std::size_t i = 0; i < delta.size(); ++i)
                trial[robin ? i : i + 1] += lambda * delta[i];
            detail::stationary_residual(trial, ell, d, m, bc, f);
            const double fn = detail::max_abs(f);
            if (fn < fnorm * (1.0 - 0.25 * lambda)) {
                u = std::move(trial);
                fnorm = fn;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;  // stalled; hand over to the monotone sweep
    }
    if (!newton_done && fnorm > tol) {
        u = detail::picard_sweep(lower, ell, d, m, bc, 1e-13 * std::max(1.0, sup_m));
        detail::stationary_residual(u, ell, d, m, bc, f);
        fnorm = detail::max_abs(f);
        if (fnorm > tol)
            throw NewtonStalled("solve_interval: neither Newton nor the monotone sweep met "
                                "the residual tolerance");
    }

    for (std::size_t j = 1; j < n; ++j)
        if (!(u[j] > 0.0))
            throw NumericalError("solve_interval: computed equilibrium lost positivity");

    StationarySolution sol;
    sol.ell = ell;
    sol.values = std::move(u);
    sol.residual = fnorm;
    out.solution = std::move(sol);
    return out;
}

// Half-line equilibrium by exhaustion: solve on L, 2L, 4L, ... until two
// consecutive truncations agree on the observation window [0, L] in max
// norm, relative to the solution scale.
inline constexpr double kTolTail = 1e-6;

struct HalflineOptions {
    double first_length = 0.0;   // 0: pick max(4 h*, 20 sqrt(d / sup m))
    int max_doublings = 8;
    double dx_target = 0.05;     // spatial resolution kept fixed across lengths
};

inline StationarySolution solve_halfline(double d, const GrowthProfile& m,
                                         const BoundaryOperator& bc,
                                         const HalflineOptions& opts = {}) {
    double l0 = opts.first_length;
    if (l0 <= 0.0) {
        const double sup_m = m.sup_bound();
        if (!(sup_m > 0.0))
            throw DomainFailure("solve_halfline: m is nowhere positive, no equilibrium");
        l0 = 20.0 * std::sqrt(d / sup_m);
        const CriticalLength hc = critical_length(d, m, bc, 400.0);
        if (hc.attained()) l0 = std::max(l0, 4.0 * *hc.value);
    }

    // the limit equilibrium exists only when lambda1 eventually goes negative
    std::vector<double> schedule;
    for (int k = 0; k <= opts.max_doublings; ++k)
        schedule.push_back(l0 * static_cast<double>(1 << k));
    const auto probe = lambda_infinity_probe(d, m, bc, schedule);
    if (probe.verdict != LimitVerdict::NegativeLimit)
        throw DomainFailure(
            "solve_halfline: lambda1 shows no negative large-domain limit on the schedule");

    // one shared spacing across all truncations, so node grids nest exactly
    const std::size_t n0 = std::max<std::size_t>(
        64, static_cast<std::size_t>(std::lround(l0 / opts.dx_target)));

    std::optional<StationarySolution> prev;
    for (int k = 0; k <= opts.max_doublings; ++k) {
        const double ell = schedule[static_cast<std::size_t>(k)];
        const std::size_t n = n0 << k;
        IntervalSolve cur = solve_interval(ell, d, m, bc, n);
        if (!cur.solution) {
            prev.reset();
            continue;  // domain still subcritical; keep growing
        }
        if (prev) {
            const std::size_t nodes = n0;  // compare on [0, l0]
            double gap = 0.0, scale = 0.0;
            for (std::size_t j = 0; j <= nodes && j < prev->values.size(); ++j) {
                gap = std::max(gap, std::abs(cur.solution->values[j] - prev->values[j]));
                scale = std::max(scale, std::abs(cur.solution->values[j]));
            }
            if (gap <= kTolTail * std::max(scale, 1e-30)) {
                StationarySolution sol = std::move(*cur.solution);
                sol.half_line = true;
                sol.observation_length = 0.5 * sol.ell;
                return sol;
            }
        }
        prev = std::move(cur.solution);
    }
    throw NotConverged("solve_halfline: truncation schedule exhausted before the tail settled");
}

// Range of u(x)/x^gamma over a trailing window [lo, hi] of a computed
// solution; the window must sit inside the solved domain.
struct TailReport {
    double lo = 0.0;
    double hi = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

inline TailReport tail_report(const StationarySolution& sol, double gamma, double window_lo,
                              double window_hi) {
    if (!(window_lo < window_hi) || window_lo < 0.0 || window_hi > sol.ell)
        throw std::invalid_argument("tail_report: window must sit inside the solved domain");
    TailReport rep;
    rep.lo = window_lo;
    rep.hi = window_hi;
    bool first = true;
    const double dx = sol.dx();
    for (std::size_t j = 0; j < sol.values.size(); ++j) {
        const double x = dx * static_cast<double>(j);
        if (x < window_lo || x > window_hi || x <= 0.0) continue;
        const double ratio = sol.values[j] / std::pow(x, gamma);
        if (first) {
            rep.min_ratio = rep.max_ratio = ratio;
            first = false;
        } else {
            rep.min_ratio = std::min(rep.min_ratio, ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        }
    }
    if (first) throw std::invalid_argument("tail_report: window contains no grid nodes");
    return rep;
}

}  // namespace stefan
