#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stefan {

// Spatial growth-rate profiles m(x) on x >= 0.  The solvers only ever see
// this interface: point evaluation plus certified upper/lower bounds and,
// when one exists, a witness point where m is positive.  Profiles may change
// sign; favourable regions can sit far from the origin.

struct ConstantGrowth {
    double c = 1.0;
};

// Linear interpolation through (x, m) knots with strictly increasing x;
// held constant beyond the last knot (and before the first).
struct PiecewiseLinearGrowth {
    std::vector<std::pair<double, double>> knots;
};

// Background level below zero with favourable patches where m >= rho.
// Each patch is a plateau at rho joined to the background by linear ramps of
// width `ramp`, so the profile stays continuous.
struct PatchyGrowth {
    double rho = 1.0;
    std::vector<std::pair<double, double>> intervals;
    double background = -1.0;
    double ramp = 1.0;
};

// m(x) = rho * x^gamma on each anchor window [x_n, k*x_n], background
// elsewhere, ramped continuously in between.  gamma in (-2, 0] mirrors the
// decay rates for which the favourable windows still carry enough mass.
struct AlgebraicFloorGrowth {
    double rho = 1.0;
    double gamma = 0.0;
    double k = 2.0;
    std::vector<double> anchors;
    double background = -1.0;
    double ramp = 1.0;
};

// Prescribed far-field behaviour: for x beyond the core region,
// m(x) = x^gamma * (mid + amp*sin(omega*x)) oscillates so that
// m(x)/x^gamma has lim inf = m1 and lim sup = m2.  The core is given by
// samples on a uniform grid over [0, core_length] and blended into the tail
// over one unit.
struct TailPrescribedGrowth {
    double gamma = 0.0;
    double m1 = 0.8;
    double m2 = 1.2;
    std::vector<double> core;
    double core_length = 10.0;
    double omega = 1.0;
};

class GrowthProfile {
  public:
    using Kind = std::variant<ConstantGrowth, PiecewiseLinearGrowth, PatchyGrowth,
                              AlgebraicFloorGrowth, TailPrescribedGrowth>;

    explicit GrowthProfile(Kind kind) : kind_(std::move(kind)) {
        check();
        compute_bounds();
        find_witness();
    }

    static GrowthProfile constant(double c) { return GrowthProfile(ConstantGrowth{c}); }

    double operator()(double x) const {
        if (x < 0.0) throw std::invalid_argument("GrowthProfile: x must be >= 0");
        return std::visit([x](const auto& k) { return eval(k, x); }, kind_);
    }

    double sup_bound() const { return sup_; }
    double inf_bound() const { return inf_; }

    // A point with m(x) > 0, if the profile has one.  Absence means the
    // habitat hypothesis fails and no spreading is possible.
    std::optional<double> positivity_witness() const { return witness_; }

    const Kind& kind() const { return kind_; }

    // Largest profile value over [0, ell], sampled densely together with the
    // profile's own breakpoints.  Used by the critical-diffusion solver.
    double max_on(double ell, std::size_t samples = 4096) const {
        double best = (*this)(0.0);
        for (std::size_t i = 1; i <= samples; ++i) {
            const double x = ell * static_cast<double>(i) / static_cast<double>(samples);
            best = std::max(best, (*this)(x));
        }
        for (double x : breakpoints())
            if (x >= 0.0 && x <= ell) best = std::max(best, (*this)(x));
        return best;
    }

  private:
    static double eval(const ConstantGrowth& g, double) { return g.c; }

    static double eval(const PiecewiseLinearGrowth& g, double x) {
        const auto& kn = g.knots;
        if (x <= kn.front().first) return kn.front().second;
        if (x >= kn.back().first) return kn.back().second;
        auto it = std::upper_bound(kn.begin(), kn.end(), x,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (x - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
    }

    // Trapezoid bump: `level` over [a, b], descending linearly to `floor`
    // over width `ramp` on both sides.
    static double trapezoid(double x, double a, double b, double level, double floor,
                            double ramp) {
        if (x >= a && x <= b) return level;
        const double dist = (x < a) ? a - x : x - b;
        if (dist >= ramp) return floor;
        return level + (floor - level) * dist / ramp;
    }

    static double eval(const PatchyGrowth& g, double x) {
        double v = g.background;
        for (const auto& [a, b] : g.intervals)
            v = std::max(v, trapezoid(x, a, b, g.rho, g.background, g.ramp));
        return v;
    }

    static double eval(const AlgebraicFloorGrowth& g, double x) {
        double v = g.background;
        for (double a : g.anchors) {
            const double b = g.k * a;
            if (x >= a && x <= b) {
                v = std::max(v, g.rho * std::pow(x, g.gamma));
            } else {
                const double edge = (x < a) ? a : b;
                const double dist = (x < a) ? a - x : x - b;
                if (dist < g.ramp) {
                    const double edge_val = g.rho * std::pow(edge, g.gamma);
                    v = std::max(v, edge_val + (g.background - edge_val) * dist / g.ramp);
                }
            }
        }
        return v;
    }

    static double tail_value(const TailPrescribedGrowth& g, double x) {
        const double mid = 0.5 * (g.m1 + g.m2);
        const double amp = 0.5 * (g.m2 - g.m1);
        return std::pow(x, g.gamma) * (mid + amp * std::sin(g.omega * x));
    }

    static double eval(const TailPrescribedGrowth& g, double x) {
        if (x >= g.core_length + 1.0) return tail_value(g, x);
        const std::size_t n = g.core.size() - 1;
        auto core_at = [&](double xi) {
            const double s = std::clamp(xi / g.core_length, 0.0, 1.0) * static_cast<double>(n);
            const std::size_t i =
                static_cast<std::size_t>(std::min(s, static_cast<double>(n - 1)));
            const double t = s - static_cast<double>(i);
            return g.core[i] + t * (g.core[i + 1] - g.core[i]);
        };
        if (x <= g.core_length) return core_at(x);
        const double t = x - g.core_length;  // blend across [core_length, core_length+1]
        return (1.0 - t) * g.core.back() + t * tail_value(g, x);
    }

    std::vector<double> breakpoints() const {
        std::vector<double> pts;
        std::visit(
            [&pts](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, PiecewiseLinearGrowth>) {
                    for (const auto& [x, m] : g.knots) pts.push_back(x);
                } else if constexpr (std::is_same_v<T, PatchyGrowth>) {
                    for (const auto& [a, b] : g.intervals) {
                        pts.push_back(a);
                        pts.push_back(b);
                    }
                } else if constexpr (std::is_same_v<T, AlgebraicFloorGrowth>) {
                    for (double a : g.anchors) {
                        pts.push_back(a);
                        pts.push_back(g.k * a);
                    }
                } else if constexpr (std::is_same_v<T, TailPrescribedGrowth>) {
                    pts.push_back(g.core_length);
                }
            },
            kind_);
        return pts;
    }

    void check() const {
        std::visit(
            [](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, PiecewiseLinearGrowth>) {
                    if (g.knots.empty())
                        throw std::invalid_argument("piecewise linear profile: no knots");
                    for (std::size_t i = 1; i < g.knots.size(); ++i)
                        if (!(g.knots[i].first > g.knots[i - 1].first))
                            throw std::invalid_argument(
                                "piecewise linear profile: knot positions must be strictly "
                                "increasing");
                } else if constexpr (std::is_same_v<T, PatchyGrowth>) {
                    if (!(g.rho > 0.0))
                        throw std::invalid_argument("patchy profile: rho must be positive");
                    if (g.background > 0.0)
                        throw std::invalid_argument("patchy profile: background must be <= 0");
                    if (!(g.ramp > 0.0))
                        throw std::invalid_argument("patchy profile: ramp width must be positive");
                    for (const auto& [a, b] : g.intervals)
                        if (!(b > a) || a < 0.0)
                            throw std::invalid_argument("patchy profile: bad interval");
                } else if constexpr (std::is_same_v<T, AlgebraicFloorGrowth>) {
                    if (!(g.rho > 0.0) || !(g.k > 1.0))
                        throw std::invalid_argument(
                            "algebraic floor profile: need rho > 0 and k > 1");
                    if (g.gamma <= -2.0 || g.gamma > 0.0)
                        throw std::invalid_argument(
                            "algebraic floor profile: gamma must lie in (-2, 0]");
                    if (g.background > 0.0)
                        throw std::invalid_argument(
                            "algebraic floor profile: background must be <= 0");
                    for (double a : g.anchors)
                        if (!(a > 0.0))
                            throw std::invalid_argument(
                                "algebraic floor profile: anchors must be positive");
                } else if constexpr (std::is_same_v<T, TailPrescribedGrowth>) {
                    if (!(g.m1 > 0.0) || !(g.m2 >= g.m1))
                        throw std::invalid_argument("tail profile: need 0 < m1 <= m2");
                    if (g.gamma <= -2.0 || g.gamma > 0.0)
                        throw std::invalid_argument("tail profile: gamma must lie in (-2, 0]");
                    if (g.core.size() < 2 || !(g.core_length > 0.0))
                        throw std::invalid_argument("tail profile: bad core description");
                }
            },
            kind_);
    }

    void compute_bounds() {
        std::visit(
            [this](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, ConstantGrowth>) {
                    sup_ = inf_ = g.c;
                } else if constexpr (std::is_same_v<T, PiecewiseLinearGrowth>) {
                    sup_ = g.knots.front().second;
                    inf_ = sup_;
                    for (const auto& [x, m] : g.knots) {
                        sup_ = std::max(sup_, m);
                        inf_ = std::min(inf_, m);
                    }
                } else if constexpr (std::is_same_v<T, PatchyGrowth>) {
                    sup_ = std::max(g.rho, g.background);
                    inf_ = g.background;
                } else if constexpr (std::is_same_v<T, AlgebraicFloorGrowth>) {
                    // x^gamma is nonincreasing for gamma <= 0, so each window
                    // peaks at its left anchor
                    sup_ = g.background;
                    for (double a : g.anchors)
                        sup_ = std::max(sup_, g.rho * std::pow(a, g.gamma));
                    inf_ = g.background;
                } else if constexpr (std::is_same_v<T, TailPrescribedGrowth>) {
                    double core_max = g.core.front(), core_min = g.core.front();
                    for (double v : g.core) {
                        core_max = std::max(core_max, v);
                        core_min = std::min(core_min, v);
                    }
                    const double tail_peak =
                        g.m2 * (g.gamma == 0.0 ? 1.0 : std::pow(g.core_length, g.gamma));
                    sup_ = std::max(core_max, tail_peak);
                    // the tail stays positive; 0 is a certified floor for it
                    inf_ = std::min(core_min, g.gamma == 0.0 ? g.m1 : 0.0);
                }
            },
            kind_);
    }

    void find_witness() {
        witness_.reset();
        std::visit(
            [this](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, ConstantGrowth>) {
                    if (g.c > 0.0) witness_ = 1.0;
                } else if constexpr (std::is_same_v<T, PiecewiseLinearGrowth>) {
                    for (const auto& [x, m] : g.knots)
                        if (m > 0.0 && x >= 0.0) {
                            witness_ = x;
                            return;
                        }
                } else if constexpr (std::is_same_v<T, PatchyGrowth>) {
                    if (!g.intervals.empty())
                        witness_ = 0.5 * (g.intervals.front().first + g.intervals.front().second);
                } else if constexpr (std::is_same_v<T, AlgebraicFloorGrowth>) {
                    if (!g.anchors.empty()) witness_ = g.anchors.front();
                } else if constexpr (std::is_same_v<T, TailPrescribedGrowth>) {
                    // the tail oscillates around a positive mean; probe half a period
                    for (int j = 0; j < 16; ++j) {
                        const double x =
                            g.core_length + 1.0 + static_cast<double>(j) * 0.25 * 3.14159265358979 /
                                                      std::max(g.omega, 1e-30);
                        if (eval(g, x) > 0.0) {
                            witness_ = x;
                            return;
                        }
                    }
                }
            },
            kind_);
        // fall back to a coarse scan so e.g. a piecewise profile that is only
        // positive between knots still gets its witness
        if (!witness_ && sup_ > 0.0) {
            for (int j = 1; j <= 4096; ++j) {
                const double x = 200.0 * static_cast<double>(j) / 4096.0;
                if ((*this)(x) > 0.0) {
                    witness_ = x;
                    break;
                }
            }
        }
    }

    Kind kind_;
    double sup_ = 0.0;
    double inf_ = 0.0;
    std::optional<double> witness_;
};

}  // namespace stefan
