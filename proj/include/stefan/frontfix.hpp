#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan/errors.hpp"
#include "stefan/interp.hpp"
#include "stefan/problem.hpp"
#include "stefan/tridiag.hpp"

namespace stefan {

// Time integration of the free-boundary problem
//
//   u_t - d u_xx = u (m(x) - u)   on 0 < x < h(t),
//   B[u] = 0 at x = 0,  u(t, h(t)) = 0,  h'(t) = -mu u_x(t, h(t)),
//
// after pinning the moving domain to y = x/h(t) with w(t, y) = u(t, x):
//
//   w_t - d zeta(t) w_yy - xi(t, y) w_y = w (m(h(t) y) - w),
//   zeta = 1/h^2,  xi = y h'/h,
//   (alpha w - (beta/h) w_y)(t, 0) = 0,  w(t, 1) = 0,
//   h' = -(mu/h) w_y(t, 1).
//
// One step treats diffusion implicitly (tridiagonal solve per pass) and
// advection/reaction explicitly; the front is advanced by a predictor pass
// followed by one corrector pass with averaged (h, h').  Solutions obey
// 0 < w <= M and 0 < h' <= mu*M with M = max(max u0, sup m), and the
// stepper enforces exactly that: any nonpositive interior value or front
// speed rejects the step so the driver can retry with dt halved.

struct FrontFixedState {
    double t = 0.0;
    double h = 0.0;
    double hprime = 0.0;
    std::vector<double> w;  // nodes y_j = j/N, j = 0..N; w[N] = 0 always

    std::size_t intervals() const { return w.size() - 1; }
};

inline double solution_bound(const ProblemSpec& spec) {
    return std::max(spec.u0.max_value(), spec.m.sup_bound());
}

namespace detail {

// Second-order one-sided derivative of w at y = 1 (uses w[N] = 0).
inline double front_slope(const std::vector<double>& w) {
    const std::size_t n = w.size() - 1;
    const double dy = 1.0 / static_cast<double>(n);
    return (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * dy);
}

inline double stefan_speed(const ProblemSpec& spec, double h, const std::vector<double>& w) {
    return -(spec.mu / h) * front_slope(w);
}

// One implicit-diffusion / explicit-advection-reaction pass with frozen
// coefficients (h, hp).  Returns the full node vector including the pinned
// w[N] = 0.
inline std::vector<double> imex_pass(const ProblemSpec& spec, const std::vector<double>& w,
                                     double h, double hp, double dt) {
    const std::size_t n = w.size() - 1;
    const double dy = 1.0 / static_cast<double>(n);
    const double r = dt * spec.d / (h * h * dy * dy);
    const bool robin = !spec.boundary.is_dirichlet();
    const std::size_t rows = robin ? n : n - 1;

    Tridiagonal a;
    a.lower.assign(rows, 0.0);
    a.diag.assign(rows, 0.0);
    a.upper.assign(rows, 0.0);
    std::vector<double> rhs(rows);

    for (std::size_t rix = 0; rix < rows; ++rix) {
        const std::size_t j = robin ? rix : rix + 1;
        const double y = dy * static_cast<double>(j);
        const double mj = spec.m(h * y);
        if (robin && j == 0) {
            const double g = 2.0 * dy * spec.boundary.alpha() * h / spec.boundary.beta();
            a.diag[rix] = 1.0 + r * (2.0 + g);
            a.upper[rix] = -2.0 * r;
            rhs[rix] = w[0] + dt * w[0] * (mj - w[0]);  // xi(0) = 0
        } else {
            a.lower[rix] = -r;
            a.diag[rix] = 1.0 + 2.0 * r;
            a.upper[rix] = -r;
            const double xi = y * hp / h;
            const double adv = xi * (w[j + 1] - w[j - 1]) / (2.0 * dy);
            rhs[rix] = w[j] + dt * (adv + w[j] * (mj - w[j]));
        }
    }

    std::vector<double> out(n + 1, 0.0);
    std::vector<double> sol = solve_thomas(a, std::move(rhs));
    for (std::size_t rix = 0; rix < rows; ++rix) out[robin ? rix : rix + 1] = sol[rix];
    return out;
}

inline bool interior_positive(const std::vector<double>& w, bool robin) {
    const std::size_t n = w.size() - 1;
    for (std::size_t j = 1; j < n; ++j)
        if (!(w[j] > 0.0)) return false;
    if (robin && !(w[0] > 0.0)) return false;
    return true;
}

}  // namespace detail

// Largest stable step from the current state: advective CFL, the explicit
// reaction bound, and the damping bound that keeps central advection stable
// under implicit diffusion.
inline double dt_max(const ProblemSpec& spec, const FrontFixedState& state) {
    const double m_big = solution_bound(spec);
    const double lip = std::max(std::abs(spec.m.sup_bound()), std::abs(spec.m.inf_bound())) +
                       2.0 * m_big;
    const double dy = 1.0 / static_cast<double>(state.intervals());
    double dt = 0.5 / lip;
    if (state.hprime > 0.0) {
        dt = std::min(dt, 0.5 * dy * state.h / state.hprime);
        dt = std::min(dt, 2.0 * spec.d / (state.hprime * state.hprime));
    }
    return dt;
}

// Map the initial data onto the unit grid.  Shape-preserving interpolation
// keeps positivity when the state resolution differs from the sample grid.
inline FrontFixedState transform_initial(const ProblemSpec& spec, std::size_t n) {
    if (n < 32) throw std::invalid_argument("transform_initial: need at least 32 intervals");
    FrontFixedState s;
    s.t = 0.0;
    s.h = spec.u0.h0;
    s.w.assign(n + 1, 0.0);
    const MonotoneCubic interp(0.0, spec.u0.h0, spec.u0.samples);
    for (std::size_t j = 0; j < n; ++j)
        s.w[j] = interp(spec.u0.h0 * static_cast<double>(j) / static_cast<double>(n));
    s.w[n] = 0.0;
    s.hprime = detail::stefan_speed(spec, s.h, s.w);
    if (s.hprime < 0.0) s.hprime = 0.0;  // flat-front data: h starts at rest
    return s;
}

// One accepted time step, or StepRejected if positivity or front monotonicity
// failed at this dt.
inline FrontFixedState step(const ProblemSpec& spec, const FrontFixedState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (dt > dt_max(spec, state) * (1.0 + 1e-12))
        throw std::invalid_argument("step: dt exceeds the stability bound");
    const bool robin = !spec.boundary.is_dirichlet();
    const double m_big = solution_bound(spec);

    // predictor at beginning-of-step coefficients
    std::vector<double> w_pred = detail::imex_pass(spec, state.w, state.h, state.hprime, dt);
    if (!detail::interior_positive(w_pred, robin))
        throw StepRejected("predictor produced a nonpositive interior value");
    const double h_pred = state.h + dt * state.hprime;
    const double hp_pred = detail::stefan_speed(spec, h_pred, w_pred);

    // corrector re-runs the same step with midpoint front data
    const double h_mid = state.h + 0.5 * dt * state.hprime;
    const double hp_mid = 0.5 * (state.hprime + hp_pred);
    FrontFixedState next;
    next.t = state.t + dt;
    next.w = detail::imex_pass(spec, state.w, h_mid, hp_mid, dt);
    next.h = state.h + dt * hp_mid;
    if (!detail::interior_positive(next.w, robin))
        throw StepRejected("corrector produced a nonpositive interior value");
    next.hprime = detail::stefan_speed(spec, next.h, next.w);
    if (!(next.hprime > 0.0)) throw StepRejected("front speed lost positivity");

    double wmax = 0.0;
    for (double v : next.w) wmax = std::max(wmax, v);
    if (wmax > 2.0 * m_big)
        throw NumericalError("step: solution exceeded twice its a priori bound (blow-up guard)");
    return next;
}

struct Snapshot {
    double t = 0.0;
    double h = 0.0;
    std::vector<double> w;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> h;
    std::vector<double> hprime;
    std::vector<double> max_u;
    std::vector<double> mass;
    std::vector<double> mass_residual;
    std::vector<Snapshot> snapshots;
    std::size_t steps = 0;
    std::size_t rejections = 0;
    bool stopped_early = false;
};

struct SimulateOptions {
    std::vector<double> output_times;    // trajectory rows; t = 0 and t_end always included
    std::vector<double> snapshot_times;  // full profiles
    double dt_cap = std::numeric_limits<double>::infinity();
    // called after every accepted step; return false to stop the run
    std::function<bool(const FrontFixedState&)> observer;
};

namespace detail {

// Right-hand side of the mass identity
//   d/dt Int u = -(d/mu) h' - d u_x(0) + Int u (m - u) dx,
// evaluated on the transformed state.  Its time integral accumulated over a
// reporting interval gives the balance defect.
inline double mass_flux(const ProblemSpec& spec, const FrontFixedState& s) {
    const std::size_t n = s.intervals();
    const double dy = 1.0 / static_cast<double>(n);
    double flux = -spec.d * s.hprime / spec.mu;
    if (!spec.boundary.is_neumann()) {
        const double wy0 = (-3.0 * s.w[0] + 4.0 * s.w[1] - s.w[2]) / (2.0 * dy);
        flux -= spec.d * wy0 / s.h;
    }
    std::vector<double> f(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double y = dy * static_cast<double>(j);
        f[j] = s.w[j] * (spec.m(s.h * y) - s.w[j]);
    }
    flux += s.h * trapezoid(f, dy);
    return flux;
}

inline double mass_of(const FrontFixedState& s) {
    return s.h * trapezoid(s.w, 1.0 / static_cast<double>(s.intervals()));
}

}  // namespace detail

inline Trajectory simulate(const ProblemSpec& spec, double t_end, std::size_t n,
                           const SimulateOptions& opts = {}) {
    if (!(t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
    if (const auto bad = validate_spec(spec); !bad.empty()) {
        std::string msg = "simulate: invalid problem:";
        for (const auto& v : bad) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }

    // merge output and snapshot times into one sorted event list
    std::vector<double> events = opts.output_times;
    for (double ts : opts.snapshot_times) events.push_back(ts);
    events.push_back(t_end);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 events.end());
    auto is_event = [](const std::vector<double>& list, double t) {
        for (double v : list)
            if (std::abs(v - t) < 1e-9) return true;
        return false;
    };

    FrontFixedState state = transform_initial(spec, n);
    const double m_big = solution_bound(spec);

    Trajectory traj;
    auto record_row = [&](const FrontFixedState& s, double residual) {
        traj.t.push_back(s.t);
        traj.h.push_back(s.h);
        traj.hprime.push_back(s.hprime);
        double wmax = 0.0;
        for (double v : s.w) wmax = std::max(wmax, v);
        traj.max_u.push_back(wmax);
        traj.mass.push_back(detail::mass_of(s));
        traj.mass_residual.push_back(residual);
    };
    record_row(state, 0.0);

    double last_mass = detail::mass_of(state);
    double last_row_t = 0.0;
    double flux_accum = 0.0;
    double flux_prev = detail::mass_flux(spec, state);

    double dt = std::min(dt_max(spec, state), opts.dt_cap);
    std::size_t event_ix = 0;
    bool running = true;
    while (running && state.t < t_end - 1e-12) {
        while (event_ix < events.size() && events[event_ix] <= state.t + 1e-12) ++event_ix;
        const double t_target = event_ix < events.size() ? events[event_ix] : t_end;

        dt = std::min({dt * 1.25, dt_max(spec, state), opts.dt_cap, t_target - state.t});
        int rejects = 0;
        FrontFixedState next;
        for (;;) {
            try {
                next = step(spec, state, dt);
                break;
            } catch (const StepRejected&) {
                ++traj.rejections;
                double wmax = 0.0;
                for (double v : state.w) wmax = std::max(wmax, v);
                if (wmax < 1e-290 * std::max(m_big, 1.0))
                    throw NumericalError("simulate: solution underflowed to zero");
                dt *= 0.5;
                if (++rejects > 60 || !(dt > 0.0))
                    throw NumericalError("simulate: step size collapsed after repeated rejection");
            }
        }
        ++traj.steps;
        const double flux_next = detail::mass_flux(spec, next);
        flux_accum += 0.5 * dt * (flux_prev + flux_next);
        flux_prev = flux_next;
        state = std::move(next);

        if (opts.observer && !opts.observer(state)) {
            running = false;
            traj.stopped_early = true;
        }

        const bool at_event = std::abs(state.t - t_target) < 1e-12;
        if ((at_event && (is_event(opts.output_times, state.t) ||
                          std::abs(state.t - t_end) < 1e-12)) ||
            !running) {
            const double mass_now = detail::mass_of(state);
            const double span = state.t - last_row_t;
            const double resid =
                span > 0.0 ? std::abs(mass_now - last_mass - flux_accum) / span : 0.0;
            record_row(state, resid);
            last_mass = mass_now;
            last_row_t = state.t;
            flux_accum = 0.0;
        }
        if (at_event && is_event(opts.snapshot_times, state.t))
            traj.snapshots.push_back({state.t, state.h, state.w});
    }
    return traj;
}

}  // namespace stefan
