#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "stefan/stationary.hpp"

using namespace stefan;

namespace {

const GrowthProfile kUnitGrowth = GrowthProfile::constant(1.0);

}  // namespace

TEST_CASE("subcritical intervals carry only the trivial equilibrium", "[stationary]") {
    // ell = 1 < pi/2: the eigenvalue is positive and no positive state exists
    const IntervalSolve out =
        solve_interval(1.0, 1.0, kUnitGrowth, BoundaryOperator::neumann());
    CHECK_FALSE(out.solution.has_value());
    const double lambda_exact = std::pow(M_PI / 2.0, 2) - 1.0;
    CHECK(out.lambda1 == Catch::Approx(lambda_exact).margin(1e-4));
}

TEST_CASE("supercritical interval solve is positive and accurate", "[stationary]") {
    const IntervalSolve out =
        solve_interval(4.0, 1.0, kUnitGrowth, BoundaryOperator::neumann());
    REQUIRE(out.solution.has_value());
    CHECK(out.lambda1 < 0.0);
    const StationarySolution& sol = *out.solution;
    CHECK(sol.ell == 4.0);
    CHECK(sol.values.back() == 0.0);
    CHECK(sol.min_interior() > 0.0);
    // the solver's stopping rule scales with the diffusion operator norm
    const double n2 = 512.0 * 512.0;
    CHECK(sol.residual <= 1e-12 * (1.0 + n2 / 16.0));
    for (double v : sol.values) CHECK(v <= 1.0 + 1e-9);
}

TEST_CASE("a wide habitat equilibrium sits at the carrying capacity", "[stationary]") {
    const IntervalSolve out =
        solve_interval(80.0, 1.0, kUnitGrowth, BoundaryOperator::neumann(), 1600);
    REQUIRE(out.solution.has_value());
    // away from the absorbing endpoint the state is flat at sup m = 1
    const auto& u = out.solution->values;
    const std::size_t mid = u.size() / 2;
    CHECK(u[mid] == Catch::Approx(1.0).margin(1e-6));
    CHECK(u[u.size() / 4] == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("every admissible start lands on the same equilibrium", "[stationary]") {
    const double ell = 6.0;
    const std::size_t n = 256;
    auto zig = GrowthProfile(PiecewiseLinearGrowth{{{0.0, 1.0}, {3.0, -0.2}, {6.0, 0.9}}});
    const auto bc = BoundaryOperator(0.4, 0.6);

    const IntervalSolve base = solve_interval(ell, 1.0, zig, bc, n);
    REQUIRE(base.solution.has_value());

    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(n + 1, 0.05));
    starts.push_back(std::vector<double>(n + 1, zig.sup_bound()));
    std::vector<double> ramp(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        ramp[j] = 0.8 * static_cast<double>(n - j) / static_cast<double>(n);
    starts.push_back(ramp);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> jitter(0.0, 0.5);
    std::vector<double> noisy(n + 1);
    for (double& v : noisy) v = jitter(rng);
    starts.push_back(noisy);
    starts.push_back(base.solution->values);

    for (const auto& start : starts) {
        const IntervalSolve probe = solve_interval(ell, 1.0, zig, bc, n, &start);
        REQUIRE(probe.solution.has_value());
        double gap = 0.0;
        for (std::size_t j = 0; j <= n; ++j)
            gap = std::max(gap, std::abs(probe.solution->values[j] -
                                         base.solution->values[j]));
        CHECK(gap <= 1e-8);
    }

    const std::vector<double> short_start(n, 0.1);
    CHECK_THROWS_AS(solve_interval(ell, 1.0, zig, bc, n, &short_start),
                    std::invalid_argument);
}

TEST_CASE("half-line exhaustion certifies a settled tail", "[stationary]") {
    const StationarySolution sol =
        solve_halfline(1.0, kUnitGrowth, BoundaryOperator::neumann());
    CHECK(sol.half_line);
    CHECK(sol.observation_length == Catch::Approx(0.5 * sol.ell));
    // for m = 1 with a reflecting origin the limit state is identically 1
    const double dx = sol.dx();
    for (std::size_t j = 0; j < sol.values.size(); ++j) {
        const double x = dx * static_cast<double>(j);
        if (x > sol.observation_length) break;
        CHECK(sol.values[j] == Catch::Approx(1.0).margin(1e-5));
    }
}

TEST_CASE("absorbing-origin half-line profile matches a shooting oracle", "[stationary]") {
    const StationarySolution sol =
        solve_halfline(1.0, kUnitGrowth, BoundaryOperator::dirichlet());
    CHECK(sol.half_line);

    // the limit state solves u'' = -u(1 - u), u(0) = 0, u(inf) = 1, whose
    // exact slope at the origin is sqrt(1/3); integrate that initial value
    // problem independently and compare on [0, 6]
    const double slope_exact = std::sqrt(1.0 / 3.0);
    const double dx = sol.dx();
    const std::size_t nodes = static_cast<std::size_t>(std::lround(6.0 / dx));
    const std::vector<double> shot =
        oracle::rk4_semiwave(slope_exact, 0.0, 1.0, 1.0, 6.0, nodes);
    REQUIRE(shot.size() <= sol.values.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < shot.size(); ++j)
        worst = std::max(worst, std::abs(sol.values[j] - shot[j]));
    CHECK(worst < 5e-3);
}

TEST_CASE("tail report is exact on a hand-built algebraic profile", "[stationary]") {
    StationarySolution sol;
    sol.ell = 10.0;
    sol.values.resize(101);
    const double dx = 0.1;
    for (std::size_t j = 0; j < sol.values.size(); ++j) {
        const double x = dx * static_cast<double>(j);
        sol.values[j] = j == 0 ? 0.0 : 2.0 / x;
    }
    const TailReport rep = tail_report(sol, -1.0, 5.0, 10.0);
    CHECK(rep.min_ratio == Catch::Approx(2.0).margin(1e-12));
    CHECK(rep.max_ratio == Catch::Approx(2.0).margin(1e-12));
    CHECK(rep.lo == 5.0);
    CHECK(rep.hi == 10.0);

    CHECK_THROWS_AS(tail_report(sol, -1.0, 5.0, 11.0), std::invalid_argument);
    CHECK_THROWS_AS(tail_report(sol, -1.0, 7.0, 6.0), std::invalid_argument);
}

TEST_CASE("tail report brackets a prescribed far-field oscillation", "[stationary]") {
    TailPrescribedGrowth tg;
    tg.gamma = 0.0;
    tg.m1 = 0.8;
    tg.m2 = 1.2;
    tg.core = {1.0, 1.0, 1.0, 1.0, 1.0};
    tg.core_length = 4.0;
    tg.omega = 1.0;
    const GrowthProfile m{tg};

    HalflineOptions opts;
    opts.first_length = 30.0;
    const StationarySolution sol =
        solve_halfline(1.0, m, BoundaryOperator::neumann(), opts);
    const TailReport rep =
        tail_report(sol, 0.0, 0.5 * sol.observation_length, sol.observation_length);
    CHECK(rep.min_ratio > 0.8 - 0.05);
    CHECK(rep.max_ratio < 1.2 + 0.05);
}

TEST_CASE("half-line failure modes are reported as domain errors", "[stationary]") {
    // nowhere-positive growth: no equilibrium can exist
    CHECK_THROWS_AS(
        solve_halfline(1.0, GrowthProfile::constant(-0.5), BoundaryOperator::neumann()),
        DomainFailure);

    // a favourable sliver too narrow to ever turn the eigenvalue negative
    PatchyGrowth sliver;
    sliver.rho = 0.5;
    sliver.intervals = {{100.0, 100.2}};
    sliver.background = -1.0;
    sliver.ramp = 0.05;
    HalflineOptions short_opts;
    short_opts.first_length = 10.0;
    short_opts.max_doublings = 3;
    CHECK_THROWS_AS(
        solve_halfline(1.0, GrowthProfile{sliver}, BoundaryOperator::neumann(), short_opts),
        DomainFailure);

    // an admissible problem whose schedule is cut off before the tail settles
    HalflineOptions no_room;
    no_room.first_length = 20.0;
    no_room.max_doublings = 0;
    CHECK_THROWS_AS(
        solve_halfline(1.0, kUnitGrowth, BoundaryOperator::neumann(), no_room),
        NotConverged);
}
