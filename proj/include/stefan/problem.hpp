#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan/boundary.hpp"
#include "stefan/growth.hpp"

namespace stefan {

// Initial population density u0 on [0, h0], stored as samples on a uniform
// grid (inclusive of both endpoints).  Structural requirements (positive h0,
// enough samples) are enforced here; hypothesis-level requirements (interior
// positivity, vanishing endpoint, boundary compatibility) are reported by
// validate_spec so that an invalid candidate can still be represented and
// diagnosed.
struct InitialProfile {
    double h0;
    std::vector<double> samples;

    InitialProfile(double h0, std::vector<double> samples)
        : h0(h0), samples(std::move(samples)) {
        if (!(this->h0 > 0.0)) throw std::invalid_argument("InitialProfile: h0 must be positive");
        if (this->samples.size() < 4)
            throw std::invalid_argument("InitialProfile: need at least 4 samples");
    }

    double dx() const { return h0 / static_cast<double>(samples.size() - 1); }
    double max_value() const { return *std::max_element(samples.begin(), samples.end()); }

    // One-sided second-order derivative at x = 0, the same stencil the
    // boundary rows of the solvers use.
    double forward_derivative0() const {
        return (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * dx());
    }

    // A compatible bump: u0(x) = s*(h0 - x)*(x + c) with c chosen so
    // alpha*u0(0) = beta*u0'(0) holds exactly (also at the discrete level,
    // since the one-sided stencil is exact on quadratics).  Scaled so the
    // maximum equals `amplitude`.
    static InitialProfile bump(double h0, double amplitude, std::size_t n,
                               const BoundaryOperator& bc) {
        if (n < 8) throw std::invalid_argument("InitialProfile::bump: n too small");
        const double c = bc.beta() * h0 / (bc.alpha() * h0 + bc.beta());
        std::vector<double> u(n + 1);
        double peak = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double x = h0 * static_cast<double>(j) / static_cast<double>(n);
            u[j] = (h0 - x) * (x + c);
            peak = std::max(peak, u[j]);
        }
        for (double& v : u) v *= amplitude / peak;
        u[n] = 0.0;
        return InitialProfile(h0, std::move(u));
    }
};

struct ProblemSpec {
    double d;
    double mu;
    BoundaryOperator boundary;
    GrowthProfile m;
    InitialProfile u0;

    ProblemSpec(double d, double mu, BoundaryOperator boundary, GrowthProfile m,
                InitialProfile u0)
        : d(d), mu(mu), boundary(boundary), m(std::move(m)), u0(std::move(u0)) {
        if (!(d > 0.0)) throw std::invalid_argument("ProblemSpec: d must be positive");
        if (!(mu > 0.0)) throw std::invalid_argument("ProblemSpec: mu must be positive");
    }
};

// Relative tolerance for the discrete boundary-compatibility residual of u0.
inline constexpr double kTolBoundaryCompat = 1e-8;

// Full hypothesis check.  Returns every violated requirement as a message;
// an empty list means the problem is admissible.  Pure: no state is touched,
// so calling it twice gives the same answer.
inline std::vector<std::string> validate_spec(const ProblemSpec& spec) {
    std::vector<std::string> violations;

    if (!(spec.d > 0.0)) violations.push_back("d must be positive");
    if (!(spec.mu > 0.0)) violations.push_back("mu must be positive");
    if (!(spec.u0.h0 > 0.0)) violations.push_back("h0 must be positive");
    if (std::abs(spec.boundary.alpha() + spec.boundary.beta() - 1.0) > 1e-14)
        violations.push_back("boundary coefficients must satisfy alpha + beta = 1");

    if (!spec.m.positivity_witness())
        violations.push_back("condition (A) violated: m nowhere positive");

    const auto& u = spec.u0.samples;
    if (u.back() != 0.0) violations.push_back("u0 endpoint must vanish");
    bool interior_positive = true;
    for (std::size_t j = 1; j + 1 < u.size(); ++j)
        if (!(u[j] > 0.0)) {
            interior_positive = false;
            break;
        }
    if (!interior_positive) violations.push_back("u0 must be positive at interior nodes");
    const double compat = spec.boundary.alpha() * u.front() -
                          spec.boundary.beta() * spec.u0.forward_derivative0();
    if (std::abs(compat) > kTolBoundaryCompat * std::max(spec.u0.max_value(), 1e-300))
        violations.push_back("u0 boundary compatibility residual exceeds tolerance");

    return violations;
}

}  // namespace stefan
