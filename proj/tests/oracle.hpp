#pragma once

// Independent references the test suite checks the solvers against: a dense
// eigendecomposition of the same discrete operator, closed-form solutions,
// an RK4 integration of the semi-wave ODE, and a seeded generator of valid
// random problem instances.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "stefan/boundary.hpp"
#include "stefan/eigen.hpp"
#include "stefan/growth.hpp"
#include "stefan/problem.hpp"

namespace oracle {

// Smallest-real-part eigenvalue of the same tridiagonal the solver builds,
// via a full dense decomposition.  The matrix is nonsymmetric in the Robin
// row, so the general solver is used and the real parts compared.
inline double dense_lambda1(double ell, double d, const stefan::GrowthProfile& m,
                            const stefan::BoundaryOperator& bc, std::size_t n) {
    const stefan::Tridiagonal t = stefan::detail::assemble_operator(ell, d, m, bc, n);
    const std::size_t rows = t.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, rows);
    for (std::size_t i = 0; i < rows; ++i) {
        a(i, i) = t.diag[i];
        if (i + 1 < rows) {
            a(i, i + 1) = t.upper[i];
            a(i + 1, i) = t.lower[i + 1];
        }
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        best = std::min(best, es.eigenvalues()[i].real());
    return best;
}

// u' = u (r - u), u(0) = u0: the spatially uniform upper barrier for the
// reaction term.
inline double logistic(double u0, double r, double t) {
    if (r == 0.0) return u0 / (1.0 + u0 * t);
    return r / (1.0 + (r / u0 - 1.0) * std::exp(-r * t));
}

// Integrate the semi-wave ODE  d w'' = k w' - w (c - w)  as an initial value
// problem from (w, w') = (0, slope0) with classical RK4 on a fixed fine step;
// returns w sampled every `every` steps up to x_end.
inline std::vector<double> rk4_semiwave(double slope0, double k, double c, double d,
                                        double x_end, std::size_t steps) {
    const double h = x_end / static_cast<double>(steps);
    double w = 0.0, v = slope0;
    std::vector<double> out{w};
    auto f = [&](double wj, double vj, double& dw, double& dv) {
        dw = vj;
        dv = (k * vj - wj * (c - wj)) / d;
    };
    for (std::size_t i = 0; i < steps; ++i) {
        double k1w, k1v, k2w, k2v, k3w, k3v, k4w, k4v;
        f(w, v, k1w, k1v);
        f(w + 0.5 * h * k1w, v + 0.5 * h * k1v, k2w, k2v);
        f(w + 0.5 * h * k2w, v + 0.5 * h * k2v, k3w, k3v);
        f(w + h * k3w, v + h * k3v, k4w, k4v);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.push_back(w);
    }
    return out;
}

// Randomized but always-valid problem instances.  Parameters stay inside the
// regime where the a-priori bounds of the continuous theory carry over to
// the discrete scheme: moderate diffusion, growth capped near one.
struct SpecSampler {
    std::mt19937 rng;

    explicit SpecSampler(unsigned seed) : rng(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    stefan::GrowthProfile random_growth() {
        const int pick = std::uniform_int_distribution<int>(0, 2)(rng);
        if (pick == 0) return stefan::GrowthProfile::constant(uniform(0.4, 1.2));
        if (pick == 1) {
            stefan::PiecewiseLinearGrowth g;
            double x = 0.0;
            const int knots = std::uniform_int_distribution<int>(3, 7)(rng);
            for (int i = 0; i < knots; ++i) {
                g.knots.emplace_back(x, uniform(-0.5, 1.2));
                x += uniform(0.5, 2.0);
            }
            // guarantee a favourable region somewhere in reach
            g.knots[static_cast<std::size_t>(knots / 2)].second = uniform(0.6, 1.2);
            return stefan::GrowthProfile(std::move(g));
        }
        stefan::PatchyGrowth g;
        g.rho = uniform(0.5, 1.2);
        g.background = uniform(-0.8, 0.0);
        g.ramp = uniform(0.5, 1.5);
        double x = uniform(0.0, 0.5);
        const int patches = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int i = 0; i < patches; ++i) {
            const double width = uniform(1.0, 3.0);
            g.intervals.emplace_back(x, x + width);
            x += width + uniform(1.0, 3.0);
        }
        return stefan::GrowthProfile(std::move(g));
    }

    stefan::BoundaryOperator random_boundary() {
        const int pick = std::uniform_int_distribution<int>(0, 2)(rng);
        if (pick == 0) return stefan::BoundaryOperator::neumann();
        if (pick == 1) return stefan::BoundaryOperator::dirichlet();
        const double alpha = uniform(0.2, 0.8);
        return stefan::BoundaryOperator(alpha, 1.0 - alpha);
    }

    stefan::ProblemSpec random_spec() {
        const double d = uniform(0.5, 2.0);
        const double mu = uniform(0.2, 5.0);
        auto bc = random_boundary();
        auto m = random_growth();
        const double h0 = uniform(0.6, 2.0);
        double amplitude = uniform(0.1, 0.8) * std::max(m.sup_bound(), 0.5);

        // Keep the initial front slope below M = max(max u0, sup m): the
        // front speed starts at mu*|u0'(h0)|, so the solution bound
        // hprime <= mu*M only holds from t = 0 for slope-compatible data.
        auto profile = stefan::InitialProfile::bump(h0, amplitude, 64, bc);
        for (int pass = 0; pass < 3; ++pass) {
            const auto& u = profile.samples;
            const std::size_t n = u.size() - 1;
            const double slope =
                (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * profile.dx());
            const double cap = std::max(profile.max_value(), m.sup_bound());
            if (std::abs(slope) <= 0.85 * cap) break;
            amplitude *= 0.85 * cap / std::abs(slope);
            profile = stefan::InitialProfile::bump(h0, amplitude, 64, bc);
        }
        return stefan::ProblemSpec{d, mu, bc, m, std::move(profile)};
    }
};

}  // namespace oracle
