#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan/eigen.hpp"
#include "stefan/errors.hpp"
#include "stefan/frontfix.hpp"
#include "stefan/interp.hpp"
#include "stefan/problem.hpp"
#include "stefan/semiwave.hpp"
#include "stefan/stationary.hpp"

namespace stefan {

// Long-time fate of a trajectory.  Crossing h > h* + margin certifies
// spreading outright: once the habitat is supercritical the population can
// no longer die out.  Vanishing has no finite-time certificate, so it is
// declared on accumulated evidence instead: the habitat is still
// subcritical, the population is tiny, and the front has stalled, all
// sustained over a unit time window.  Borderline runs end Undetermined.

enum class Verdict { Spreading, Vanishing, Undetermined };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Spreading: return "Spreading";
        case Verdict::Vanishing: return "Vanishing";
        default: return "Undetermined";
    }
}

struct Outcome {
    Verdict verdict = Verdict::Undetermined;
    double t_decided = 0.0;  // decision time; equals t_max when Undetermined
    double h_end = 0.0;
    double max_u_end = 0.0;
    double hprime_end = 0.0;
    // eigenvalue at h_end, evaluated when a vanishing certificate was tested
    std::optional<double> lambda1_end;
    // critical habitat length used for the spreading margin (empty when the
    // eigenvalue stays nonnegative at every probed length)
    std::optional<double> h_star;
    Trajectory trajectory;
};

// fraction of the solution bound below which the population counts as tiny
inline constexpr double kVanishDensityFactor = 1e-4;
// fraction of the front-speed bound mu*M below which the front counts as stalled
inline constexpr double kVanishSpeedFactor = 1e-6;
// evidence must persist this long before the verdict is committed
inline constexpr double kVanishWindow = 1.0;

struct ClassifyOptions {
    // spacing of recorded trajectory rows; 0 picks t_max / 400
    double output_dt = 0.0;
    double dt_cap = std::numeric_limits<double>::infinity();
    // reuse an already-computed critical length (bisection is rerun otherwise)
    std::optional<CriticalLength> known_critical_length;
};

namespace detail {

// soundness margin for the spreading certificate: twice the critical-length
// bisection tolerance plus twice the physical grid spacing at the front
inline double spreading_margin(double h, std::size_t n) {
    return 2.0 * (1e-5 + h / static_cast<double>(n));
}

}  // namespace detail

inline Outcome classify(const ProblemSpec& spec, double t_max, std::size_t n,
                        const ClassifyOptions& opts = {}) {
    if (!(t_max > 0.0)) throw std::invalid_argument("classify: t_max must be positive");
    if (const auto bad = validate_spec(spec); !bad.empty()) {
        std::string msg = "classify: invalid problem:";
        for (const auto& v : bad) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }

    const CriticalLength crit =
        opts.known_critical_length ? *opts.known_critical_length
                                   : critical_length(spec.d, spec.m, spec.boundary);

    Outcome out;
    out.h_star = crit.value;

    // already supercritical at t = 0: no simulation needed
    if (crit.value && spec.u0.h0 > *crit.value + detail::spreading_margin(spec.u0.h0, n)) {
        out.verdict = Verdict::Spreading;
        out.t_decided = 0.0;
        out.h_end = spec.u0.h0;
        out.max_u_end = spec.u0.max_value();
        out.hprime_end = 0.0;
        return out;
    }

    const double m_big = solution_bound(spec);
    const double eps_v = kVanishDensityFactor * m_big;
    const double eps_h = kVanishSpeedFactor * spec.mu * m_big;

    double quiet_since = std::numeric_limits<double>::quiet_NaN();
    bool decided = false;

    SimulateOptions sim;
    sim.dt_cap = opts.dt_cap;
    const double out_dt = opts.output_dt > 0.0 ? opts.output_dt : t_max / 400.0;
    for (double ts = out_dt; ts < t_max; ts += out_dt) sim.output_times.push_back(ts);

    sim.observer = [&](const FrontFixedState& s) {
        if (crit.value && s.h > *crit.value + detail::spreading_margin(s.h, n)) {
            out.verdict = Verdict::Spreading;
            out.t_decided = s.t;
            decided = true;
            return false;
        }
        const double w_max = *std::max_element(s.w.begin(), s.w.end());
        if (w_max < eps_v && s.hprime < eps_h) {
            if (std::isnan(quiet_since)) quiet_since = s.t;
            if (s.t - quiet_since >= kVanishWindow) {
                const double lambda = principal_eigenvalue(s.h, spec.d, spec.m, spec.boundary).lambda1;
                out.lambda1_end = lambda;
                if (lambda > kTolSign) {
                    out.verdict = Verdict::Vanishing;
                    out.t_decided = s.t;
                    decided = true;
                    return false;
                }
                quiet_since = s.t;  // subcritical evidence missing; wait another window
            }
        } else {
            quiet_since = std::numeric_limits<double>::quiet_NaN();
        }
        return true;
    };

    out.trajectory = simulate(spec, t_max, n, sim);
    out.h_end = out.trajectory.h.back();
    out.max_u_end = out.trajectory.max_u.back();
    out.hprime_end = out.trajectory.hprime.back();
    if (!decided) {
        out.verdict = Verdict::Undetermined;
        out.t_decided = t_max;
    }
    return out;
}

struct MuStarResult {
    double mu_star = 0.0;
    double mu_lo = 0.0;       // final bracket: Vanishing below, Spreading above
    double mu_hi = 0.0;
    double t_max_final = 0.0; // horizon after any doublings
    int classifications = 0;
};

// Sharp expansion-rate threshold by bisection.  Verdicts are monotone in mu
// (a faster-expanding front dominates a slower one), so a single
// Vanishing/Spreading bracket pins mu* down.  Runs that end Undetermined
// get a doubled horizon; persistent ambiguity aborts with the interval.
inline MuStarResult find_mu_star(const ProblemSpec& spec, double t_max, double mu_lo,
                                 double mu_hi, double tol_mu = 1e-3, std::size_t n = 200,
                                 int max_horizon_doublings = 3) {
    if (!(mu_lo > 0.0) || !(mu_hi > mu_lo))
        throw std::invalid_argument("find_mu_star: need 0 < mu_lo < mu_hi");
    if (!(tol_mu > 0.0)) throw std::invalid_argument("find_mu_star: tol_mu must be positive");

    ClassifyOptions copts;
    copts.known_critical_length = critical_length(spec.d, spec.m, spec.boundary);

    MuStarResult res;
    res.t_max_final = t_max;

    auto classify_at = [&](double mu) {
        ProblemSpec trial = spec;
        trial.mu = mu;
        for (;;) {
            Outcome o = classify(trial, res.t_max_final, n, copts);
            ++res.classifications;
            if (o.verdict != Verdict::Undetermined) return o.verdict;
            if (res.t_max_final >= t_max * (1 << max_horizon_doublings)) {
                std::ostringstream msg;
                msg << "find_mu_star: undetermined at mu = " << mu
                    << " even with t_max = " << res.t_max_final
                    << "; threshold lies in [" << res.mu_lo << ", " << res.mu_hi << "]";
                throw NotConverged(msg.str());
            }
            res.t_max_final *= 2.0;
        }
    };

    res.mu_lo = mu_lo;
    res.mu_hi = mu_hi;
    if (classify_at(mu_lo) != Verdict::Vanishing)
        throw BracketInvalid("find_mu_star: lower endpoint did not vanish", mu_lo, mu_hi);
    if (classify_at(mu_hi) != Verdict::Spreading)
        throw BracketInvalid("find_mu_star: upper endpoint did not spread", mu_lo, mu_hi);

    while (res.mu_hi - res.mu_lo > tol_mu * res.mu_hi) {
        const double mid = 0.5 * (res.mu_lo + res.mu_hi);
        if (classify_at(mid) == Verdict::Spreading)
            res.mu_hi = mid;
        else
            res.mu_lo = mid;
    }
    res.mu_star = 0.5 * (res.mu_lo + res.mu_hi);
    return res;
}

// Max-norm distance of a front-fixed profile to a half-line reference on
// [0, window]; both are read through monotone cubic interpolants and
// compared on a dense uniform probe grid.
namespace detail {

inline double profile_gap(const Snapshot& snap, const StationarySolution& ref, double window) {
    const std::size_t n = snap.w.size() - 1;
    MonotoneCubic u_of_x(0.0, snap.h, snap.w);
    MonotoneCubic ref_of_x(0.0, ref.ell, ref.values);

    const std::size_t probes = 4 * std::max<std::size_t>(n, ref.values.size());
    double gap = 0.0;
    for (std::size_t q = 0; q <= probes; ++q) {
        const double x = window * static_cast<double>(q) / static_cast<double>(probes);
        gap = std::max(gap, std::abs(u_of_x(x) - ref_of_x(x)));
    }
    return gap;
}

}  // namespace detail

struct ConvergenceGap {
    double t = 0.0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    bool skipped = false;  // front had not yet covered the window
};

struct ConvergenceReport {
    std::vector<ConvergenceGap> gaps;
    double window_length = 0.0;
    bool tail_nonincreasing = false;  // last three evaluated gaps do not grow
    StationarySolution reference;
};

// Long-time approach of a spreading run to the half-line stationary state,
// measured in max-norm over the fixed window [0, L] at the requested
// checkpoints.  Checkpoints the front has not yet covered are skipped.
inline ConvergenceReport convergence_check(const ProblemSpec& spec,
                                           std::vector<double> t_checkpoints, double window,
                                           std::size_t n = 400) {
    if (t_checkpoints.empty())
        throw std::invalid_argument("convergence_check: need at least one checkpoint");
    if (!(window > 0.0))
        throw std::invalid_argument("convergence_check: window must be positive");
    std::sort(t_checkpoints.begin(), t_checkpoints.end());
    const double t_end = t_checkpoints.back();

    Outcome fate = classify(spec, t_end, n);
    if (fate.verdict != Verdict::Spreading)
        throw DomainFailure(std::string("convergence_check: trajectory is ") +
                            to_string(fate.verdict) + ", not Spreading");

    ConvergenceReport rep;
    rep.window_length = window;
    rep.reference = solve_halfline(spec.d, spec.m, spec.boundary);
    if (window > rep.reference.ell)
        throw std::invalid_argument("convergence_check: window exceeds the reference domain");

    SimulateOptions sim;
    sim.snapshot_times = t_checkpoints;
    Trajectory traj = simulate(spec, t_end, n, sim);

    std::vector<double> evaluated;
    for (const Snapshot& snap : traj.snapshots) {
        ConvergenceGap g;
        g.t = snap.t;
        if (snap.h < window) {
            g.skipped = true;
        } else {
            g.gap = detail::profile_gap(snap, rep.reference, window);
            evaluated.push_back(g.gap);
        }
        rep.gaps.push_back(g);
    }
    if (evaluated.size() >= 3) {
        const std::size_t k = evaluated.size();
        rep.tail_nonincreasing = evaluated[k - 2] <= evaluated[k - 3] * (1.0 + 1e-9) &&
                                 evaluated[k - 1] <= evaluated[k - 2] * (1.0 + 1e-9);
    }
    return rep;
}

struct SpeedEstimate {
    double slope = 0.0;        // least-squares dh/dt on the trailing fit window
    double slope_tail = 0.0;   // same fit on the trailing half of that window
    double drift = 0.0;        // slope_tail - slope; large drift means transient
    std::size_t samples = 0;
    std::optional<bool> within_band;  // set when reference bounds were given
    double band_low = std::numeric_limits<double>::quiet_NaN();
    double band_high = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double lsq_slope(const std::vector<double>& t, const std::vector<double>& h,
                        std::size_t begin) {
    const std::size_t k = t.size() - begin;
    double tbar = 0.0, hbar = 0.0;
    for (std::size_t i = begin; i < t.size(); ++i) {
        tbar += t[i];
        hbar += h[i];
    }
    tbar /= static_cast<double>(k);
    hbar /= static_cast<double>(k);
    double num = 0.0, den = 0.0;
    for (std::size_t i = begin; i < t.size(); ++i) {
        num += (t[i] - tbar) * (h[i] - hbar);
        den += (t[i] - tbar) * (t[i] - tbar);
    }
    if (!(den > 0.0)) throw WindowTooShort("speed_estimate: fit window has no time extent");
    return num / den;
}

}  // namespace detail

// Asymptotic front speed from the recorded trajectory: least-squares slope
// of h against t over the trailing fraction of the run, with a half-window
// refit as a drift diagnostic.  When semi-wave bounds are supplied the
// estimate is checked against [k_low - slack, k_high + slack].
inline SpeedEstimate speed_estimate(const Trajectory& traj, double fit_fraction = 0.5,
                                    const std::optional<SpeedBounds>& bounds = std::nullopt,
                                    double band_slack = 0.05) {
    if (!(fit_fraction > 0.0) || fit_fraction > 1.0)
        throw std::invalid_argument("speed_estimate: fit_fraction must lie in (0, 1]");
    const std::size_t total = traj.t.size();
    if (total < 8) throw WindowTooShort("speed_estimate: trajectory has too few rows");

    const double t0 = traj.t.front(), t1 = traj.t.back();
    const double t_cut = t1 - fit_fraction * (t1 - t0);
    std::size_t begin = 0;
    while (begin < total && traj.t[begin] < t_cut) ++begin;
    if (total - begin < 8)
        throw WindowTooShort("speed_estimate: fit window holds fewer than 8 samples");

    SpeedEstimate est;
    est.samples = total - begin;
    est.slope = detail::lsq_slope(traj.t, traj.h, begin);
    const std::size_t tail_begin = begin + (total - begin) / 2;
    if (total - tail_begin >= 4)
        est.slope_tail = detail::lsq_slope(traj.t, traj.h, tail_begin);
    else
        est.slope_tail = est.slope;
    est.drift = est.slope_tail - est.slope;

    if (bounds) {
        est.band_low = bounds->k_low - band_slack;
        est.band_high = bounds->k_high + band_slack;
        est.within_band = est.slope >= est.band_low && est.slope <= est.band_high;
    }
    return est;
}

}  // namespace stefan
