#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracle.hpp"
#include "stefan/frontfix.hpp"
#include "stefan/interp.hpp"

using namespace stefan;

namespace {

ProblemSpec neumann_unit_spec(double h0 = 1.0, double amplitude = 0.5) {
    auto neu = BoundaryOperator::neumann();
    return ProblemSpec{1.0, 1.0, neu, GrowthProfile::constant(1.0),
                       InitialProfile::bump(h0, amplitude, 64, neu)};
}

}  // namespace

TEST_CASE("initial transform rescales onto the unit interval", "[frontfix]") {
    // u0(x) = x (2 - x) on h0 = 2 becomes w0(y) = 4 y (1 - y), peak 1 at y = 1/2
    auto dir = BoundaryOperator::dirichlet();
    std::vector<double> samples(65);
    for (std::size_t j = 0; j <= 64; ++j) {
        const double x = 2.0 * static_cast<double>(j) / 64.0;
        samples[j] = x * (2.0 - x);
    }
    ProblemSpec spec{1.0, 1.0, dir, GrowthProfile::constant(1.0),
                     InitialProfile(2.0, samples)};
    const FrontFixedState s = transform_initial(spec, 128);
    CHECK(s.h == 2.0);
    CHECK(s.w[0] == 0.0);
    CHECK(s.w[128] == 0.0);
    CHECK(s.w[64] == Catch::Approx(1.0).margin(1e-10));
    CHECK(s.w[32] == Catch::Approx(4.0 * 0.25 * 0.75).margin(1e-6));
    CHECK(s.hprime > 0.0);

    CHECK_THROWS_AS(transform_initial(spec, 16), std::invalid_argument);
}

TEST_CASE("single step honours the stability bound", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    const FrontFixedState s0 = transform_initial(spec, 100);
    const double cap = dt_max(spec, s0);
    CHECK(cap > 0.0);
    CHECK_THROWS_AS(step(spec, s0, 2.0 * cap), std::invalid_argument);

    const FrontFixedState s1 = step(spec, s0, 0.5 * cap);
    CHECK(s1.t == Catch::Approx(0.5 * cap));
    CHECK(s1.h > s0.h);
    CHECK(s1.hprime > 0.0);
}

TEST_CASE("density and front obey the a-priori bounds", "[frontfix]") {
    oracle::SpecSampler sampler(99);
    for (int trial = 0; trial < 5; ++trial) {
        ProblemSpec spec = sampler.random_spec();
        const double m_big = solution_bound(spec);
        bool ok = true;
        double h_prev = 0.0;
        double t_prev = 0.0;
        SimulateOptions opts;
        opts.observer = [&](const FrontFixedState& s) {
            for (std::size_t j = 0; j + 1 < s.w.size(); ++j)
                if (!(s.w[j] >= 0.0) || s.w[j] > m_big * (1.0 + 1e-8)) ok = false;
            if (!(s.hprime > 0.0) || s.hprime > spec.mu * m_big * (1.0 + 1e-8)) ok = false;
            // strictly increasing whenever the increment is representable;
            // once hprime*dt underflows below one ulp of h, equality is all
            // double precision can express
            if (s.h < h_prev) ok = false;
            const double ulp_guard =
                32.0 * std::numeric_limits<double>::epsilon() * h_prev;
            if (s.h == h_prev && s.hprime * (s.t - t_prev) > ulp_guard) ok = false;
            h_prev = s.h;
            t_prev = s.t;
            return true;
        };
        simulate(spec, 5.0, 128, opts);
        CHECK(ok);
    }
}

TEST_CASE("peak density stays under the logistic envelope", "[frontfix]") {
    // at an interior maximum the diffusion term only pulls down, so the
    // spatial peak is dominated by the logistic flow started at its level
    ProblemSpec spec = neumann_unit_spec(1.0, 0.4);
    SimulateOptions opts;
    for (double ts = 0.5; ts < 8.0; ts += 0.5) opts.output_times.push_back(ts);
    const Trajectory traj = simulate(spec, 8.0, 200, opts);
    const double r = spec.m.sup_bound();
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const double cap = oracle::logistic(0.4, r, traj.t[i]);
        CHECK(traj.max_u[i] <= cap * (1.0 + 1e-3));
    }
}

TEST_CASE("ordered initial data stay ordered", "[frontfix]") {
    auto run = [](double amplitude) {
        ProblemSpec spec = neumann_unit_spec(1.0, amplitude);
        SimulateOptions opts;
        opts.output_times = {1.0, 2.0, 3.0};
        opts.snapshot_times = {3.0};
        return simulate(spec, 3.0, 150, opts);
    };
    const Trajectory lo = run(0.3);
    const Trajectory hi = run(0.45);
    for (std::size_t i = 0; i < lo.t.size(); ++i) {
        CHECK(lo.h[i] <= hi.h[i] * (1.0 + 1e-12));
        CHECK(lo.max_u[i] <= hi.max_u[i] + 1e-9);
    }
    // whole-profile ordering on the common domain
    const Snapshot& a = lo.snapshots.front();
    const Snapshot& b = hi.snapshots.front();
    MonotoneCubic ua(0.0, a.h, a.w), ub(0.0, b.h, b.w);
    for (int q = 0; q <= 200; ++q) {
        const double x = std::min(a.h, b.h) * q / 200.0;
        CHECK(ua(x) <= ub(x) + 1e-6);
    }
}

TEST_CASE("faster expansion moves the front further", "[frontfix]") {
    auto run = [](double mu) {
        ProblemSpec spec = neumann_unit_spec();
        spec.mu = mu;
        return simulate(spec, 4.0, 150, {});
    };
    CHECK(run(0.5).h.back() < run(1.5).h.back());
}

TEST_CASE("mass balance defect shrinks with the step size", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    auto defect = [&](double cap) {
        SimulateOptions opts;
        opts.dt_cap = cap;
        return simulate(spec, 4.0, 200, opts).mass_residual.back();
    };
    const double coarse = defect(2e-2);
    const double fine = defect(2e-3);
    CHECK(fine < coarse);
    CHECK(fine < 3e-4);
}

TEST_CASE("trajectory rows land on the requested output times", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    SimulateOptions opts;
    opts.output_times = {0.7, 1.9, 3.3};
    opts.snapshot_times = {2.0};
    const Trajectory traj = simulate(spec, 4.0, 100, opts);
    REQUIRE(traj.t.size() == 5);  // t = 0, the three rows, t_end
    CHECK(traj.t[1] == Catch::Approx(0.7));
    CHECK(traj.t[2] == Catch::Approx(1.9));
    CHECK(traj.t[3] == Catch::Approx(3.3));
    CHECK(traj.t[4] == Catch::Approx(4.0));
    REQUIRE(traj.snapshots.size() == 1);
    CHECK(traj.snapshots.front().t == Catch::Approx(2.0));
    CHECK(traj.snapshots.front().w.size() == 101);
}

TEST_CASE("observer can stop a run early", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    SimulateOptions opts;
    opts.observer = [](const FrontFixedState& s) { return s.t < 1.0; };
    const Trajectory traj = simulate(spec, 50.0, 100, opts);
    CHECK(traj.stopped_early);
    CHECK(traj.t.back() < 1.5);
}

TEST_CASE("simulate validates the problem before running", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    spec.m = GrowthProfile::constant(-1.0);
    CHECK_THROWS_WITH(simulate(spec, 1.0, 100, {}),
                      Catch::Matchers::ContainsSubstring("condition (A)"));
    ProblemSpec ok = neumann_unit_spec();
    CHECK_THROWS_AS(simulate(ok, -1.0, 100, {}), std::invalid_argument);
}

TEST_CASE("identical runs produce identical trajectories", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    SimulateOptions opts;
    opts.output_times = {1.0, 2.0};
    const Trajectory a = simulate(spec, 3.0, 120, opts);
    const Trajectory b = simulate(spec, 3.0, 120, opts);
    REQUIRE(a.t.size() == b.t.size());
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        CHECK(a.h[i] == b.h[i]);
        CHECK(a.max_u[i] == b.max_u[i]);
        CHECK(a.mass[i] == b.mass[i]);
    }
    CHECK(a.steps == b.steps);
}

TEST_CASE("halving the grid spacing shrinks the front error superlinearly", "[frontfix]") {
    ProblemSpec spec = neumann_unit_spec();
    SimulateOptions opts;
    opts.dt_cap = 5e-4;  // fixed step isolates the spatial error
    double h[3];
    const std::size_t grids[3] = {60, 120, 240};
    for (int i = 0; i < 3; ++i) h[i] = simulate(spec, 3.0, grids[i], opts).h.back();
    const double ratio = std::abs(h[0] - h[1]) / std::abs(h[1] - h[2]);
    CHECK(ratio > 2.5);
}
