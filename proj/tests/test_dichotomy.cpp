#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "stefan/dichotomy.hpp"

using namespace stefan;

namespace {

// m = 1, d = 1, reflecting origin: critical length pi/2, so h0 = 0.5 starts
// well subcritical and the fate is decided by the expansion rate alone
ProblemSpec gate_spec(double mu, double h0 = 0.5, double amplitude = 0.1) {
    const auto bc = BoundaryOperator::neumann();
    return ProblemSpec{1.0, mu, bc, GrowthProfile::constant(1.0),
                       InitialProfile::bump(h0, amplitude, 64, bc)};
}

}  // namespace

TEST_CASE("slow expansion of a small habitat ends in extinction", "[dichotomy]") {
    const Outcome o = classify(gate_spec(1e-4), 40.0, 200);
    CHECK(o.verdict == Verdict::Vanishing);
    REQUIRE(o.h_star.has_value());
    CHECK(*o.h_star == Catch::Approx(M_PI / 2.0).margin(1e-4));
    CHECK(o.h_end <= *o.h_star + detail::spreading_margin(o.h_end, 200));
    REQUIRE(o.lambda1_end.has_value());
    CHECK(*o.lambda1_end > 0.0);
    CHECK(o.max_u_end < 1e-4);
    CHECK(o.t_decided < 40.0);
}

TEST_CASE("fast expansion spreads and its certificate is sound", "[dichotomy]") {
    const Outcome o = classify(gate_spec(1e3), 40.0, 200);
    CHECK(o.verdict == Verdict::Spreading);
    REQUIRE(o.h_star.has_value());
    CHECK(o.h_end > *o.h_star);
    // the certificate promises a negative eigenvalue on the reached habitat
    const double lam = principal_eigenvalue(o.h_end, 1.0, GrowthProfile::constant(1.0),
                                            BoundaryOperator::neumann(), 256)
                           .lambda1;
    CHECK(lam < 0.0);
    CHECK(o.t_decided < 1.0);
}

TEST_CASE("a supercritical habitat spreads at every expansion rate", "[dichotomy]") {
    for (double mu : {1e-4, 1.0, 1e3}) {
        const Outcome o = classify(gate_spec(mu, 2.0), 10.0, 200);
        CHECK(o.verdict == Verdict::Spreading);
        CHECK(o.t_decided == 0.0);
    }
}

TEST_CASE("verdicts are monotone in the expansion rate", "[dichotomy]") {
    bool seen_spreading = false;
    for (double mu : {1.0, 31.0, 33.0, 1000.0}) {
        const Verdict v = classify(gate_spec(mu), 40.0, 200).verdict;
        if (v == Verdict::Spreading) seen_spreading = true;
        // once some rate spreads, every faster rate must as well
        if (seen_spreading) CHECK(v != Verdict::Vanishing);
    }
    CHECK(seen_spreading);
}

TEST_CASE("bisection pins the threshold expansion rate", "[dichotomy]") {
    const ProblemSpec spec = gate_spec(1.0);
    const MuStarResult r = find_mu_star(spec, 40.0, 1.0, 1000.0);
    CHECK(r.mu_lo < r.mu_star);
    CHECK(r.mu_star < r.mu_hi);
    CHECK(r.mu_hi - r.mu_lo <= 1e-3 * r.mu_hi);
    CHECK(r.classifications >= 5);

    // the returned bracket survives independent re-classification at +-5%
    ProblemSpec probe = spec;
    probe.mu = 0.95 * r.mu_star;
    CHECK(classify(probe, r.t_max_final, 200).verdict == Verdict::Vanishing);
    probe.mu = 1.05 * r.mu_star;
    CHECK(classify(probe, r.t_max_final, 200).verdict == Verdict::Spreading);
}

TEST_CASE("a bracket with the wrong endpoint verdicts is rejected", "[dichotomy]") {
    // h0 = 2 spreads instantly for every mu, so no bracket can be valid
    CHECK_THROWS_AS(find_mu_star(gate_spec(1.0, 2.0), 5.0, 1.0, 10.0), BracketInvalid);
    CHECK_THROWS_AS(find_mu_star(gate_spec(1.0), 5.0, -1.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(find_mu_star(gate_spec(1.0), 5.0, 5.0, 5.0), std::invalid_argument);
}

TEST_CASE("persistent ambiguity reports the surviving interval", "[dichotomy]") {
    // the lower endpoint takes about seven time units to die out, so a
    // two-unit horizon with no doubling allowance cannot classify it
    CHECK_THROWS_WITH(find_mu_star(gate_spec(1.0), 2.0, 15.0, 40.0, 1e-3, 200, 0),
                      Catch::Matchers::ContainsSubstring("threshold lies in"));
}

TEST_CASE("equilibrium comparison refuses a vanishing trajectory", "[dichotomy]") {
    CHECK_THROWS_WITH(convergence_check(gate_spec(1e-4), {10.0, 20.0}, 2.0, 200),
                      Catch::Matchers::ContainsSubstring("not Spreading"));
}

TEST_CASE("speed fit recovers a synthetic linear front exactly", "[dichotomy]") {
    Trajectory traj;
    for (int i = 0; i < 20; ++i) {
        traj.t.push_back(0.5 * i);
        traj.h.push_back(2.0 + 0.37 * 0.5 * i);
    }
    const SpeedEstimate est = speed_estimate(traj);
    CHECK(est.slope == Catch::Approx(0.37).margin(1e-12));
    CHECK(est.slope_tail == Catch::Approx(0.37).margin(1e-12));
    CHECK(std::abs(est.drift) < 1e-12);
    CHECK_FALSE(est.within_band.has_value());

    SpeedBounds band{0.3, 0.4};
    const SpeedEstimate inside = speed_estimate(traj, 0.5, band);
    REQUIRE(inside.within_band.has_value());
    CHECK(*inside.within_band);
    CHECK(inside.band_low == Catch::Approx(0.25));
    CHECK(inside.band_high == Catch::Approx(0.45));

    SpeedBounds far{0.5, 0.6};
    const SpeedEstimate outside = speed_estimate(traj, 0.5, far);
    REQUIRE(outside.within_band.has_value());
    CHECK_FALSE(*outside.within_band);
}

TEST_CASE("speed fit refuses windows without enough samples", "[dichotomy]") {
    Trajectory tiny;
    for (int i = 0; i < 5; ++i) {
        tiny.t.push_back(i);
        tiny.h.push_back(1.0 + i);
    }
    CHECK_THROWS_AS(speed_estimate(tiny), WindowTooShort);

    Trajectory traj;
    for (int i = 0; i < 40; ++i) {
        traj.t.push_back(0.25 * i);
        traj.h.push_back(1.0 + 0.1 * i);
    }
    CHECK_THROWS_AS(speed_estimate(traj, 0.01), WindowTooShort);
    CHECK_THROWS_AS(speed_estimate(traj, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(speed_estimate(traj, 0.0), std::invalid_argument);
}

TEST_CASE("a spreading run travels inside the semi-wave band", "[dichotomy]") {
    // start just below the critical length so the crossing is certified
    // almost immediately, then measure the cruise speed on a long run
    const ProblemSpec spec = gate_spec(1.0, 1.55, 0.5);
    const Outcome o = classify(spec, 5.0, 200);
    REQUIRE(o.verdict == Verdict::Spreading);
    CHECK(o.t_decided < 1.0);

    SimulateOptions sim;
    for (int i = 1; i <= 120; ++i) sim.output_times.push_back(0.5 * i);
    const Trajectory traj = simulate(spec, 60.0, 200, sim);
    const SpeedBounds band = speed_bounds(1.0, 1.0, 1.0, 1.0);
    const SpeedEstimate est = speed_estimate(traj, 0.5, band, 0.1);
    REQUIRE(est.within_band.has_value());
    CHECK(*est.within_band);
    CHECK(est.slope > 0.0);
    CHECK(std::abs(est.drift) < 0.01);
}
