#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stefan/boundary.hpp"
#include "stefan/errors.hpp"
#include "stefan/growth.hpp"
#include "stefan/interp.hpp"
#include "stefan/tridiag.hpp"

namespace stefan {

// Principal eigenvalue lambda1(ell; d, m) of
//
//     -d phi'' - m(x) phi = lambda phi   on (0, ell),
//     alpha phi(0) - beta phi'(0) = 0,   phi(ell) = 0,
//
// discretized with central differences on a uniform grid and a second-order
// ghost node for the Robin end.  Its sign decides between extinction and
// persistence on a fixed domain, so everything downstream (critical length,
// critical diffusion, the spreading certificate) reduces to sign and root
// queries against this solver.

inline constexpr double kTolSign = 1e-8;   // sign decisions on lambda1
inline constexpr double kTolEigen = 1e-10; // residual scale factor

struct EigenResult {
    double lambda1 = 0.0;      // Richardson-extrapolated eigenvalue
    double lambda1_grid = 0.0; // raw eigenvalue of the fine-grid matrix
    double ell = 0.0;
    std::size_t grid_n = 0;            // fine grid: nodes at j*ell/grid_n
    std::vector<double> phi;           // eigenfunction on the fine grid, max = 1
    double residual = 0.0;             // ||T phi - lambda1_grid phi||_inf
};

namespace detail {

// Rows of the discrete operator for the unknowns phi_0..phi_{n-1} (Robin) or
// phi_1..phi_{n-1} (Dirichlet); phi_n = 0 is eliminated.
inline Tridiagonal assemble_operator(double ell, double d, const GrowthProfile& m,
                                     const BoundaryOperator& bc, std::size_t n) {
    const double dx = ell / static_cast<double>(n);
    const double w = d / (dx * dx);
    const bool robin = !bc.is_dirichlet();
    const std::size_t rows = robin ? n : n - 1;
    Tridiagonal t;
    t.lower.assign(rows, 0.0);
    t.diag.assign(rows, 0.0);
    t.upper.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t j = robin ? r : r + 1;  // grid index
        const double x = dx * static_cast<double>(j);
        if (robin && j == 0) {
            // ghost elimination: phi_{-1} = phi_1 - 2*dx*(alpha/beta)*phi_0
            const double g = 2.0 * dx * bc.alpha() / bc.beta();
            t.diag[r] = w * (2.0 + g) - m(0.0);
            t.upper[r] = -2.0 * w;
        } else {
            t.lower[r] = -w;
            t.diag[r] = 2.0 * w - m(x);
            t.upper[r] = -w;
        }
    }
    return t;
}

// The Robin row breaks symmetry, but T01*T10 > 0, so a diagonal similarity
// restores it; the Sturm count only needs the squared couplings.
inline double lowest_eigenvalue(const Tridiagonal& t) {
    const std::size_t n = t.size();
    std::vector<double> off(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        off[i] = std::sqrt(t.upper[i] * t.lower[i + 1]);
    return smallest_eigenvalue(t.diag, off);
}

}  // namespace detail

// Raw smallest eigenvalue of the n-interval discretization, no extrapolation.
// This is the quantity the dense-decomposition oracle can be compared with
// grid-for-grid.
inline double principal_eigenvalue_on_grid(double ell, double d, const GrowthProfile& m,
                                           const BoundaryOperator& bc, std::size_t n) {
    if (!(ell > 0.0)) throw std::invalid_argument("principal_eigenvalue: ell must be positive");
    if (!(d > 0.0)) throw std::invalid_argument("principal_eigenvalue: d must be positive");
    if (n < 8) throw std::invalid_argument("principal_eigenvalue: grid too coarse");
    return detail::lowest_eigenvalue(detail::assemble_operator(ell, d, m, bc, n));
}

inline EigenResult principal_eigenvalue(double ell, double d, const GrowthProfile& m,
                                        const BoundaryOperator& bc, std::size_t grid_n = 256) {
    const double coarse = principal_eigenvalue_on_grid(ell, d, m, bc, grid_n);
    const std::size_t fine_n = 2 * grid_n;
    const Tridiagonal t = detail::assemble_operator(ell, d, m, bc, fine_n);
    const double fine = detail::lowest_eigenvalue(t);

    EigenResult res;
    res.ell = ell;
    res.grid_n = fine_n;
    res.lambda1_grid = fine;
    // central differences carry an even error expansion, so one Richardson
    // step removes the dx^2 term
    res.lambda1 = (4.0 * fine - coarse) / 3.0;

    std::vector<double> v = inverse_iteration(t, fine);
    const bool robin = !bc.is_dirichlet();
    // re-attach the eliminated boundary values
    res.phi.assign(fine_n + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) res.phi[robin ? i : i + 1] = v[i];

    bool positive = true;
    for (std::size_t j = 1; j < fine_n; ++j)
        if (!(res.phi[j] > 0.0)) positive = false;
    if (robin && !(res.phi[0] > 0.0) && bc.beta() > 0.0) positive = false;
    if (!positive)
        throw NumericalError(
            "principal_eigenvalue: grid too coarse for a sign-definite eigenfunction");

    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double row = t.diag[i] * v[i] - fine * v[i];
        if (i > 0) row += t.lower[i] * v[i - 1];
        if (i + 1 < v.size()) row += t.upper[i] * v[i + 1];
        r = std::max(r, std::abs(row));
    }
    res.residual = r;
    return res;
}

// Outcome of a root search for the critical habitat length h*(d): the length
// at which lambda1 changes sign.  When lambda1 stays positive out to
// ell_max, the threshold does not exist below that horizon and the last
// probe is reported instead.
struct CriticalLength {
    std::optional<double> value;
    double probed_ell = 0.0;    // last length examined
    double lambda_at_probe = 0.0;

    bool attained() const { return value.has_value(); }
};

inline CriticalLength critical_length(double d, const GrowthProfile& m,
                                      const BoundaryOperator& bc, double ell_max = 100.0,
                                      std::size_t grid_n = 256) {
    if (!(d > 0.0)) throw std::invalid_argument("critical_length: d must be positive");
    if (!(ell_max > 0.0)) throw std::invalid_argument("critical_length: ell_max must be positive");
    auto lam = [&](double ell) {
        return principal_eigenvalue(ell, d, m, bc, grid_n).lambda1;
    };

    CriticalLength out;
    double hi = std::min(1.0, ell_max);
    double lam_hi = lam(hi);
    while (lam_hi > 0.0 && hi < ell_max) {
        hi = std::min(2.0 * hi, ell_max);
        lam_hi = lam(hi);
    }
    out.probed_ell = hi;
    out.lambda_at_probe = lam_hi;
    if (lam_hi > 0.0) return out;  // positive all the way out: not attained

    double lo = 0.5 * hi;
    double lam_lo = lam(lo);
    while (lam_lo <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-8) throw NumericalError("critical_length: no positive lambda1 near ell = 0");
        lam_lo = lam(lo);
    }

    // lambda1 is strictly decreasing in ell, so plain bisection suffices
    while (hi - lo > 1e-5) {
        const double mid = 0.5 * (lo + hi);
        const double lm = lam(mid);
        out.probed_ell = mid;
        out.lambda_at_probe = lm;
        if (std::abs(lm) <= kTolSign) {
            out.value = mid;
            return out;
        }
        (lm > 0.0 ? lo : hi) = mid;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

// Critical diffusion d*(ell): the d at which lambda1(ell; d, m) crosses zero.
// Exists precisely when m is somewhere positive on [0, ell]; otherwise
// lambda1 > 0 for every d and the request reports why.
struct CriticalDiffusion {
    std::optional<double> value;
    double max_m = 0.0;  // max of m over [0, ell]; nonpositive means not attained

    bool attained() const { return value.has_value(); }
};

inline CriticalDiffusion critical_diffusion(double ell, const GrowthProfile& m,
                                            const BoundaryOperator& bc,
                                            std::size_t grid_n = 256) {
    if (!(ell > 0.0)) throw std::invalid_argument("critical_diffusion: ell must be positive");
    CriticalDiffusion out;
    out.max_m = m.max_on(ell);
    if (out.max_m <= 0.0) return out;

    auto lam = [&](double d) {
        return principal_eigenvalue(ell, d, m, bc, grid_n).lambda1;
    };
    double hi = 1.0;
    int guard = 0;
    while (lam(hi) <= 0.0) {
        hi *= 2.0;
        if (++guard > 200) throw NumericalError("critical_diffusion: no positive lambda1 reached");
    }
    double lo = 0.5 * hi;
    guard = 0;
    while (lam(lo) > 0.0) {
        lo *= 0.5;
        if (++guard > 400)
            throw NumericalError("critical_diffusion: no negative lambda1 reached");
    }
    while (hi - lo > 1e-5 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        const double lm = lam(mid);
        if (std::abs(lm) <= kTolSign) {
            out.value = mid;
            return out;
        }
        (lm > 0.0 ? hi : lo) = mid;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

// Variational quotient for a trial function phi given on the uniform grid
// over [0, ell]:
//
//   [ d*(alpha/beta)*phi(0)^2  +  d*Int phi'^2  -  Int m phi^2 ] / Int phi^2
//
// with the boundary term dropped for Dirichlet (where phi(0) = 0 is
// required).  Gradient terms use cell averages, mass terms the trapezoid
// rule, so smooth trial functions are resolved to O(dx^2).  Always an upper
// bound for lambda1 up to quadrature error.
inline double rayleigh_quotient(const std::vector<double>& phi, double ell, double d,
                                const GrowthProfile& m, const BoundaryOperator& bc) {
    if (phi.size() < 3) throw std::invalid_argument("rayleigh_quotient: too few samples");
    if (!(ell > 0.0)) throw std::invalid_argument("rayleigh_quotient: ell must be positive");
    const std::size_t n = phi.size() - 1;
    const double dx = ell / static_cast<double>(n);
    if (bc.is_dirichlet() && phi.front() != 0.0)
        throw std::invalid_argument("rayleigh_quotient: Dirichlet trial must vanish at x = 0");

    double stiff = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double g = (phi[j + 1] - phi[j]) / dx;
        stiff += g * g * dx;
    }
    std::vector<double> mass(n + 1), weighted(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = dx * static_cast<double>(j);
        mass[j] = phi[j] * phi[j];
        weighted[j] = m(x) * mass[j];
    }
    const double denom = trapezoid(mass, dx);
    if (!(denom > 0.0)) throw std::invalid_argument("rayleigh_quotient: trial function vanishes");

    double boundary = 0.0;
    if (bc.beta() > 0.0) boundary = d * (bc.alpha() / bc.beta()) * phi.front() * phi.front();
    return (boundary + d * stiff - trapezoid(weighted, dx)) / denom;
}

// Probe of the large-domain limit of lambda1.  The sequence is evaluated
// along the given (increasing) schedule; the first value below -kTolSign
// certifies that the limit is negative and the scan stops there.
enum class LimitVerdict { NegativeLimit, Inconclusive };

struct LambdaInfinityProbe {
    std::vector<std::pair<double, double>> values;  // (ell, lambda1)
    LimitVerdict verdict = LimitVerdict::Inconclusive;
};

inline LambdaInfinityProbe lambda_infinity_probe(double d, const GrowthProfile& m,
                                                 const BoundaryOperator& bc,
                                                 const std::vector<double>& ell_schedule,
                                                 std::size_t grid_n = 256) {
    if (ell_schedule.empty())
        throw std::invalid_argument("lambda_infinity_probe: empty schedule");
    LambdaInfinityProbe probe;
    for (double ell : ell_schedule) {
        // keep the spatial resolution roughly fixed as the domain grows
        const std::size_t n = std::max<std::size_t>(
            grid_n, static_cast<std::size_t>(ell / ell_schedule.front() *
                                             static_cast<double>(grid_n)));
        const double lam = principal_eigenvalue(ell, d, m, bc, n).lambda1;
        probe.values.emplace_back(ell, lam);
        if (lam < -kTolSign) {
            probe.verdict = LimitVerdict::NegativeLimit;
            break;
        }
    }
    return probe;
}

}  // namespace stefan
