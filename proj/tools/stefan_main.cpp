#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stefan/csv.hpp"
#include "stefan/dichotomy.hpp"
#include "stefan/eigen.hpp"
#include "stefan/frontfix.hpp"
#include "stefan/logging.hpp"
#include "stefan/semiwave.hpp"
#include "stefan/serialize.hpp"
#include "stefan/stationary.hpp"
#include "stefan/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stefan;

namespace {

// exit codes: 0 success, 1 domain error, 2 numerical failure, 64 usage/I-O
constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUsage = 64;

// Input and configuration problems surface as usage errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

// Create the output directory; an existing one is only reused under --force.
void prepare_out_dir(const std::string& out, bool force) {
    std::error_code ec;
    if (fs::exists(out)) {
        if (!force)
            throw UsageError("output directory exists: " + out + " (pass --force to reuse)");
        if (!fs::is_directory(out)) throw UsageError("output path is not a directory: " + out);
        return;
    }
    if (!fs::create_directories(out, ec) || ec)
        throw UsageError("cannot create output directory: " + out);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open for writing: " + path);
    out << text;
}

void emit_summary(const json& summary, const std::optional<std::string>& out_dir) {
    std::cout << summary.dump(2) << "\n";
    if (out_dir) write_text_file(*out_dir + "/summary.json", summary.dump(2) + "\n");
}

struct ManifestClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const std::vector<std::string>& argv, const json& config,
                    double wall_seconds) {
    json m;
    m["tool_version"] = kVersion;
    m["subcommand"] = subcommand;
    m["argv"] = argv;
    m["config"] = config;
    m["wall_seconds"] = wall_seconds;
    write_text_file(out_dir + "/manifest.json", m.dump(2) + "\n");
}

// Growth profile from either --m-const or --m-file (exactly one).
GrowthProfile growth_from_flags(const std::optional<double>& m_const,
                                const std::string& m_file) {
    if (m_const && !m_file.empty())
        throw UsageError("--m-const and --m-file are mutually exclusive");
    if (m_const) return GrowthProfile::constant(*m_const);
    if (!m_file.empty()) return growth_from_json(load_json_file(m_file));
    throw UsageError("one of --m-const or --m-file is required");
}

struct SpecOverrides {
    std::optional<double> d, mu, h0, alpha, beta;
};

ProblemSpec load_spec(const std::string& path, const SpecOverrides& ov) {
    json j = load_json_file(path);
    try {
        if (ov.d) j["d"] = *ov.d;
        if (ov.mu) j["mu"] = *ov.mu;
        if (ov.alpha) j["alpha"] = *ov.alpha;
        if (ov.beta) j["beta"] = *ov.beta;
        if (ov.h0) {
            j["h0"] = *ov.h0;
            j["u0"]["h0"] = *ov.h0;
        }
        return spec_from_json(j);
    } catch (const json::exception& e) {
        throw UsageError("bad problem spec " + path + ": " + e.what());
    }
}

void add_override_flags(CLI::App* sub, SpecOverrides& ov) {
    sub->add_option("--d", ov.d, "override diffusion coefficient");
    sub->add_option("--mu", ov.mu, "override expansion rate");
    sub->add_option("--h0", ov.h0, "override initial habitat length");
    sub->add_option("--alpha", ov.alpha, "override boundary weight on u(0)");
    sub->add_option("--beta", ov.beta, "override boundary weight on u_x(0)");
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    CsvWriter csv(path, {"t", "h", "hprime", "max_u", "mass", "mass_residual"});
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        csv.row({traj.t[i], traj.h[i], traj.hprime[i], traj.max_u[i], traj.mass[i],
                 traj.mass_residual[i]});
}

void write_snapshot_csv(const std::string& dir, const Snapshot& snap) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", snap.t);
    CsvWriter csv(dir + "/profile_t" + tag + ".csv", {"x", "u"});
    const std::size_t n = snap.w.size() - 1;
    for (std::size_t j = 0; j <= n; ++j)
        csv.row({snap.h * static_cast<double>(j) / static_cast<double>(n), snap.w[j]});
}

json outcome_to_json(const Outcome& o) {
    json j;
    j["verdict"] = to_string(o.verdict);
    j["t_decided"] = o.t_decided;
    j["h_end"] = o.h_end;
    j["max_u_end"] = o.max_u_end;
    j["hprime_end"] = o.hprime_end;
    if (o.h_star)
        j["h_star"] = *o.h_star;
    else
        j["h_star"] = nullptr;
    if (o.lambda1_end) j["lambda1_end"] = *o.lambda1_end;
    return j;
}

int run_selftest();

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> raw_argv(argv, argv + argc);
    CLI::App app{"free-boundary logistic invasion toolkit"};
    app.require_subcommand(1);

    // ---- shared option storage ------------------------------------------
    std::string spec_path, m_file, out_dir, specs_path;
    std::optional<double> m_const;
    SpecOverrides ov;
    bool force = false, halfline = false;
    double ell = 0.0, d = 1.0, alpha = 0.0, beta = 1.0, h0 = 1.0;
    double t_end = 10.0, t_max = 150.0, dt_cap = 0.0, output_dt = 0.0;
    double mu = 1.0, c = 1.0, mu_lo = 0.0, mu_hi = 0.0, tol_mu = 1e-3;
    double fit_fraction = 0.5, band_m1 = 0.0, band_m2 = 0.0, tail_gamma = 0.0;
    double ell_max = 100.0;
    std::optional<double> semiwave_k;
    std::size_t grid_n = 256, sim_n = 400, jobs = 1;
    int horizon_doublings = 3;
    unsigned seed = 12345;
    std::vector<double> snapshot_times, checkpoints;

    // ---- subcommands ----------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "integrate the free-boundary problem");
    cmd_sim->add_option("--spec", spec_path, "problem spec JSON")->required();
    cmd_sim->add_option("--t-end", t_end, "final time")->required();
    cmd_sim->add_option("--n", sim_n, "spatial intervals");
    cmd_sim->add_option("--out", out_dir, "output directory")->required();
    cmd_sim->add_option("--snapshot", snapshot_times, "profile snapshot times");
    cmd_sim->add_option("--output-dt", output_dt, "trajectory row spacing");
    cmd_sim->add_option("--dt-cap", dt_cap, "upper bound on the time step");
    cmd_sim->add_flag("--force", force, "reuse an existing output directory");
    add_override_flags(cmd_sim, ov);

    auto* cmd_eig = app.add_subcommand("eigen", "principal eigenvalue on a habitat");
    cmd_eig->add_option("--ell", ell, "habitat length")->required();
    cmd_eig->add_option("--d", d, "diffusion coefficient");
    cmd_eig->add_option("--alpha", alpha, "boundary weight on u(0)");
    cmd_eig->add_option("--beta", beta, "boundary weight on u_x(0)");
    cmd_eig->add_option("--m-const", m_const, "constant growth rate");
    cmd_eig->add_option("--m-file", m_file, "growth profile JSON");
    cmd_eig->add_option("--grid-n", grid_n, "grid intervals");
    cmd_eig->add_option("--out", out_dir, "optional output directory");
    cmd_eig->add_flag("--force", force, "reuse an existing output directory");

    auto* cmd_cl = app.add_subcommand("critical-length", "habitat length where the eigenvalue changes sign");
    cmd_cl->add_option("--d", d, "diffusion coefficient");
    cmd_cl->add_option("--alpha", alpha, "boundary weight on u(0)");
    cmd_cl->add_option("--beta", beta, "boundary weight on u_x(0)");
    cmd_cl->add_option("--m-const", m_const, "constant growth rate");
    cmd_cl->add_option("--m-file", m_file, "growth profile JSON");
    cmd_cl->add_option("--ell-max", ell_max, "largest habitat probed");
    cmd_cl->add_option("--grid-n", grid_n, "grid intervals");
    cmd_cl->add_option("--out", out_dir, "optional output directory");
    cmd_cl->add_flag("--force", force, "reuse an existing output directory");

    auto* cmd_cd = app.add_subcommand("critical-diffusion", "diffusion level where the eigenvalue changes sign");
    cmd_cd->add_option("--h0", h0, "habitat length")->required();
    cmd_cd->add_option("--alpha", alpha, "boundary weight on u(0)");
    cmd_cd->add_option("--beta", beta, "boundary weight on u_x(0)");
    cmd_cd->add_option("--m-const", m_const, "constant growth rate");
    cmd_cd->add_option("--m-file", m_file, "growth profile JSON");
    cmd_cd->add_option("--grid-n", grid_n, "grid intervals");
    cmd_cd->add_option("--out", out_dir, "optional output directory");
    cmd_cd->add_flag("--force", force, "reuse an existing output directory");

    auto* cmd_sta = app.add_subcommand("stationary", "positive equilibrium on an interval or the half line");
    cmd_sta->add_option("--spec", spec_path, "problem spec JSON (supplies d, boundary, m)")->required();
    auto* opt_ell = cmd_sta->add_option("--ell", ell, "interval length");
    auto* opt_half = cmd_sta->add_flag("--halfline", halfline, "solve on the half line by exhaustion");
    opt_ell->excludes(opt_half);
    cmd_sta->add_option("--grid-n", grid_n, "grid intervals for the interval solve");
    cmd_sta->add_option("--tail-gamma", tail_gamma, "tail exponent for the ratio report");
    cmd_sta->add_option("--out", out_dir, "output directory for solution.csv");
    cmd_sta->add_flag("--force", force, "reuse an existing output directory");
    add_override_flags(cmd_sta, ov);

    auto* cmd_sw = app.add_subcommand("semiwave", "semi-wave profile and asymptotic speed");
    cmd_sw->add_option("--mu", mu, "expansion rate");
    cmd_sw->add_option("--c", c, "far-field growth level")->required();
    cmd_sw->add_option("--d", d, "diffusion coefficient");
    cmd_sw->add_option("--k", semiwave_k, "solve one profile at this speed and print its CSV");
    cmd_sw->add_option("--out", out_dir, "optional output directory");
    cmd_sw->add_flag("--force", force, "reuse an existing output directory");

    auto* cmd_cls = app.add_subcommand("classify", "long-time fate of a trajectory");
    cmd_cls->add_option("--spec", spec_path, "problem spec JSON")->required();
    cmd_cls->add_option("--t-max", t_max, "decision horizon");
    cmd_cls->add_option("--n", sim_n, "spatial intervals");
    cmd_cls->add_option("--out", out_dir, "optional output directory");
    cmd_cls->add_flag("--force", force, "reuse an existing output directory");
    add_override_flags(cmd_cls, ov);

    auto* cmd_mu = app.add_subcommand("mu-star", "threshold expansion rate by bisection");
    cmd_mu->add_option("--spec", spec_path, "problem spec JSON")->required();
    cmd_mu->add_option("--mu-lo", mu_lo, "vanishing endpoint")->required();
    cmd_mu->add_option("--mu-hi", mu_hi, "spreading endpoint")->required();
    cmd_mu->add_option("--tol-mu", tol_mu, "relative bracket tolerance");
    cmd_mu->add_option("--t-max", t_max, "initial decision horizon");
    cmd_mu->add_option("--n", sim_n, "spatial intervals");
    cmd_mu->add_option("--horizon-doublings", horizon_doublings, "cap on t-max doublings");
    cmd_mu->add_option("--out", out_dir, "optional output directory");
    cmd_mu->add_flag("--force", force, "reuse an existing output directory");
    add_override_flags(cmd_mu, ov);

    auto* cmd_spd = app.add_subcommand("speed", "asymptotic front speed from a long run");
    cmd_spd->add_option("--spec", spec_path, "problem spec JSON")->required();
    cmd_spd->add_option("--t-end", t_end, "run length")->required();
    cmd_spd->add_option("--n", sim_n, "spatial intervals");
    cmd_spd->add_option("--fit-fraction", fit_fraction, "trailing fraction used in the fit");
    cmd_spd->add_option("--m1", band_m1, "lower far-field growth level for the reference band");
    cmd_spd->add_option("--m2", band_m2, "upper far-field growth level for the reference band");
    cmd_spd->add_option("--out", out_dir, "optional output directory");
    cmd_spd->add_flag("--force", force, "reuse an existing output directory");
    add_override_flags(cmd_spd, ov);

    auto* cmd_swp = app.add_subcommand("sweep", "classify a batch of specs");
    cmd_swp->add_option("--specs", specs_path, "JSON array of problem specs")->required();
    cmd_swp->add_option("--out", out_dir, "output directory")->required();
    cmd_swp->add_option("--t-max", t_max, "decision horizon per run");
    cmd_swp->add_option("--n", sim_n, "spatial intervals");
    cmd_swp->add_option("--jobs", jobs, "concurrent runs");
    cmd_swp->add_flag("--force", force, "reuse an existing output directory");

    auto* cmd_self = app.add_subcommand("selftest", "run the bundled invariant suite");
    cmd_self->add_option("--seed", seed, "seed for randomized checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    ManifestClock clock;
    const std::optional<std::string> out =
        out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir);

    try {
        if (out) prepare_out_dir(*out, force);
        json config;
        std::string subname;

        if (cmd_sim->parsed()) {
            subname = "simulate";
            ProblemSpec spec = load_spec(spec_path, ov);
            SimulateOptions sopts;
            sopts.snapshot_times = snapshot_times;
            if (dt_cap > 0.0) sopts.dt_cap = dt_cap;
            const double row_dt = output_dt > 0.0 ? output_dt : t_end / 200.0;
            for (double ts = row_dt; ts < t_end; ts += row_dt) sopts.output_times.push_back(ts);
            Trajectory traj = simulate(spec, t_end, sim_n, sopts);

            write_trajectory_csv(*out + "/trajectory.csv", traj);
            for (const Snapshot& snap : traj.snapshots) write_snapshot_csv(*out, snap);
            json summary;
            summary["t_end"] = traj.t.back();
            summary["h_end"] = traj.h.back();
            summary["hprime_end"] = traj.hprime.back();
            summary["max_u_end"] = traj.max_u.back();
            summary["steps"] = traj.steps;
            summary["rejections"] = traj.rejections;
            emit_summary(summary, out);
            config = {{"spec", to_json(spec)}, {"t_end", t_end},     {"n", sim_n},
                      {"output_dt", row_dt},  {"dt_cap", dt_cap},    {"snapshot", snapshot_times},
                      {"out", *out}};
        } else if (cmd_eig->parsed()) {
            subname = "eigen";
            GrowthProfile m = growth_from_flags(m_const, m_file);
            BoundaryOperator bc(alpha, beta);
            EigenResult r = principal_eigenvalue(ell, d, m, bc, grid_n);
            json summary;
            summary["lambda1"] = r.lambda1;
            summary["ell"] = r.ell;
            summary["grid_n"] = r.grid_n;
            summary["residual"] = r.residual;
            emit_summary(summary, out);
            config = {{"ell", ell}, {"d", d},        {"alpha", bc.alpha()},
                      {"beta", bc.beta()}, {"m", to_json(m)}, {"grid_n", grid_n}};
        } else if (cmd_cl->parsed()) {
            subname = "critical-length";
            GrowthProfile m = growth_from_flags(m_const, m_file);
            BoundaryOperator bc(alpha, beta);
            CriticalLength r = critical_length(d, m, bc, ell_max, grid_n);
            json summary;
            summary["attained"] = static_cast<bool>(r.value);
            summary["h_star"] = r.value ? json(*r.value) : json(nullptr);
            summary["probed_ell"] = r.probed_ell;
            summary["lambda_at_probe"] = r.lambda_at_probe;
            emit_summary(summary, out);
            config = {{"d", d},           {"alpha", bc.alpha()}, {"beta", bc.beta()},
                      {"m", to_json(m)},  {"ell_max", ell_max},  {"grid_n", grid_n}};
            if (!r.value) {
                log_error("critical length not attained up to ell = " + std::to_string(ell_max));
                if (out) write_manifest(*out, subname, raw_argv, config, clock.seconds());
                return kExitDomain;
            }
        } else if (cmd_cd->parsed()) {
            subname = "critical-diffusion";
            GrowthProfile m = growth_from_flags(m_const, m_file);
            BoundaryOperator bc(alpha, beta);
            CriticalDiffusion r = critical_diffusion(h0, m, bc, grid_n);
            json summary;
            summary["attained"] = static_cast<bool>(r.value);
            summary["d_star"] = r.value ? json(*r.value) : json(nullptr);
            summary["max_m"] = r.max_m;
            emit_summary(summary, out);
            config = {{"h0", h0},        {"alpha", bc.alpha()}, {"beta", bc.beta()},
                      {"m", to_json(m)}, {"grid_n", grid_n}};
            if (!r.value) {
                log_error("critical diffusion not attained: growth rate never positive on the habitat");
                if (out) write_manifest(*out, subname, raw_argv, config, clock.seconds());
                return kExitDomain;
            }
        } else if (cmd_sta->parsed()) {
            subname = "stationary";
            ProblemSpec spec = load_spec(spec_path, ov);
            if (!halfline && !(ell > 0.0))
                throw UsageError("stationary: pass --ell <length> or --halfline");

            StationarySolution sol;
            json summary;
            if (halfline) {
                sol = solve_halfline(spec.d, spec.m, spec.boundary);
                TailReport tr = tail_report(sol, tail_gamma, 0.3 * sol.observation_length,
                                            sol.observation_length);
                summary["ell_or_L"] = sol.ell;
                summary["observation_length"] = sol.observation_length;
                summary["residual"] = sol.residual;
                summary["min_u_interior"] = sol.min_interior();
                summary["tail_liminf"] = tr.min_ratio;
                summary["tail_limsup"] = tr.max_ratio;
            } else {
                IntervalSolve r = solve_interval(ell, spec.d, spec.m, spec.boundary, grid_n);
                if (!r.solution) {
                    std::cout << json{{"no_positive_solution", true}, {"lambda1", r.lambda1}}.dump(2)
                              << "\n";
                    log_error("no positive equilibrium: the eigenvalue is nonnegative");
                    return kExitDomain;
                }
                sol = *r.solution;
                summary["ell_or_L"] = sol.ell;
                summary["residual"] = sol.residual;
                summary["min_u_interior"] = sol.min_interior();
                summary["tail_liminf"] = nullptr;
                summary["tail_limsup"] = nullptr;
            }
            if (out) {
                CsvWriter csv(*out + "/solution.csv", {"x", "u"});
                for (std::size_t j = 0; j < sol.values.size(); ++j)
                    csv.row({sol.dx() * static_cast<double>(j), sol.values[j]});
            }
            emit_summary(summary, out);
            config = {{"spec", to_json(spec)}, {"halfline", halfline},
                      {"ell", ell},            {"grid_n", grid_n},
                      {"tail_gamma", tail_gamma}};
        } else if (cmd_sw->parsed()) {
            subname = "semiwave";
            if (semiwave_k) {
                SemiWaveResult r = solve_semiwave(*semiwave_k, c, d);
                const double dx = r.l_trunc / static_cast<double>(r.profile.size() - 1);
                std::cout << "x,w\n";
                for (std::size_t j = 0; j < r.profile.size(); ++j)
                    std::cout << format_double(dx * static_cast<double>(j)) << ','
                              << format_double(r.profile[j]) << '\n';
                if (out) {
                    CsvWriter csv(*out + "/semiwave.csv", {"x", "w"});
                    for (std::size_t j = 0; j < r.profile.size(); ++j)
                        csv.row({dx * static_cast<double>(j), r.profile[j]});
                }
            } else {
                K0Result r = find_k0(mu, c, d);
                json summary;
                summary["k0"] = r.k0;
                summary["slope0"] = r.slope0;
                summary["L_trunc"] = r.l_trunc;
                summary["residual"] = r.residual;
                emit_summary(summary, out);
            }
            config = {{"mu", mu}, {"c", c}, {"d", d}};
            if (semiwave_k) config["k"] = *semiwave_k;
        } else if (cmd_cls->parsed()) {
            subname = "classify";
            ProblemSpec spec = load_spec(spec_path, ov);
            Outcome o = classify(spec, t_max, sim_n);
            emit_summary(outcome_to_json(o), out);
            if (out && !o.trajectory.t.empty())
                write_trajectory_csv(*out + "/trajectory.csv", o.trajectory);
            config = {{"spec", to_json(spec)}, {"t_max", t_max}, {"n", sim_n}};
        } else if (cmd_mu->parsed()) {
            subname = "mu-star";
            ProblemSpec spec = load_spec(spec_path, ov);
            MuStarResult r =
                find_mu_star(spec, t_max, mu_lo, mu_hi, tol_mu, sim_n, horizon_doublings);
            json summary;
            summary["mu_star"] = r.mu_star;
            summary["mu_lo"] = r.mu_lo;
            summary["mu_hi"] = r.mu_hi;
            summary["classifications"] = r.classifications;
            summary["t_max_final"] = r.t_max_final;
            emit_summary(summary, out);
            config = {{"spec", to_json(spec)}, {"t_max", t_max},   {"mu_lo", mu_lo},
                      {"mu_hi", mu_hi},        {"tol_mu", tol_mu}, {"n", sim_n},
                      {"horizon_doublings", horizon_doublings}};
        } else if (cmd_spd->parsed()) {
            subname = "speed";
            ProblemSpec spec = load_spec(spec_path, ov);
            SimulateOptions sopts;
            const double row_dt = t_end / 400.0;
            for (double ts = row_dt; ts < t_end; ts += row_dt) sopts.output_times.push_back(ts);
            Trajectory traj = simulate(spec, t_end, sim_n, sopts);

            std::optional<SpeedBounds> bounds;
            if (band_m1 > 0.0 && band_m2 > 0.0)
                bounds = speed_bounds(spec.mu, band_m1, band_m2, spec.d);
            else if (const auto* cg = std::get_if<ConstantGrowth>(&spec.m.kind());
                     cg && cg->c > 0.0)
                bounds = speed_bounds(spec.mu, cg->c, cg->c, spec.d);

            SpeedEstimate est = speed_estimate(traj, fit_fraction, bounds);
            json summary;
            summary["slope"] = est.slope;
            summary["slope_tail"] = est.slope_tail;
            summary["drift"] = est.drift;
            summary["samples"] = est.samples;
            if (bounds) {
                summary["k_low"] = bounds->k_low;
                summary["k_high"] = bounds->k_high;
                summary["within_band"] = *est.within_band;
            }
            emit_summary(summary, out);
            if (out) write_trajectory_csv(*out + "/trajectory.csv", traj);
            config = {{"spec", to_json(spec)}, {"t_end", t_end},
                      {"n", sim_n},            {"fit_fraction", fit_fraction},
                      {"m1", band_m1},         {"m2", band_m2}};
        } else if (cmd_swp->parsed()) {
            subname = "sweep";
            json specs_json = load_json_file(specs_path);
            if (!specs_json.is_array() || specs_json.empty())
                throw UsageError("sweep: --specs must name a nonempty JSON array");
            std::vector<ProblemSpec> specs;
            for (const auto& sj : specs_json) specs.push_back(spec_from_json(sj));

            struct RunRow {
                Outcome outcome;
                std::string id;
            };
            std::vector<RunRow> rows(specs.size());
            std::atomic<std::size_t> next{0};
            std::vector<std::string> errors(specs.size());

            auto worker = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= specs.size()) return;
                    char id[16];
                    std::snprintf(id, sizeof id, "run_%03zu", i);
                    rows[i].id = id;
                    try {
                        rows[i].outcome = classify(specs[i], t_max, sim_n);
                        const std::string sub = *out + "/" + id;
                        prepare_out_dir(sub, true);
                        write_text_file(sub + "/summary.json",
                                        outcome_to_json(rows[i].outcome).dump(2) + "\n");
                        if (!rows[i].outcome.trajectory.t.empty())
                            write_trajectory_csv(sub + "/trajectory.csv",
                                                 rows[i].outcome.trajectory);
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                }
            };
            std::vector<std::thread> pool;
            const std::size_t nthreads = std::max<std::size_t>(1, std::min(jobs, specs.size()));
            for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
            for (std::size_t i = 0; i < specs.size(); ++i)
                if (!errors[i].empty())
                    throw NumericalError("sweep " + rows[i].id + " failed: " + errors[i]);

            CsvWriter csv(*out + "/sweep.csv", {"run_id", "verdict", "t_decided", "h_end",
                                                "max_u_end", "mu", "d", "h0"});
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const Outcome& o = rows[i].outcome;
                csv.row_text({rows[i].id, to_string(o.verdict), format_double(o.t_decided),
                              format_double(o.h_end), format_double(o.max_u_end),
                              format_double(specs[i].mu), format_double(specs[i].d),
                              format_double(specs[i].u0.h0)});
            }
            json summary;
            summary["runs"] = specs.size();
            summary["out"] = *out;
            emit_summary(summary, out);
            config = {{"specs", specs_json}, {"t_max", t_max}, {"n", sim_n}, {"jobs", jobs}};
        } else if (cmd_self->parsed()) {
            return run_selftest();
        }

        if (out) write_manifest(*out, subname, raw_argv, config, clock.seconds());
        return kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

namespace {

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%s %s\n", ok ? "ok  " : "FAIL", name);
        if (!ok) ++failures;
    };
    const auto m1 = GrowthProfile::constant(1.0);
    const auto neu = BoundaryOperator::neumann();
    const auto dir = BoundaryOperator::dirichlet();
    const double half_pi = 1.5707963267948966;

    check("eigenvalue vanishes at the sign-change length (flux boundary)",
          std::abs(principal_eigenvalue(half_pi, 1.0, m1, neu).lambda1) < 1e-6);
    check("eigenvalue vanishes at the sign-change length (absorbing boundary)",
          std::abs(principal_eigenvalue(2.0 * half_pi, 1.0, m1, dir).lambda1) < 1e-6);
    const auto cl = critical_length(1.0, m1, neu);
    check("critical length matches the closed form",
          cl.value && std::abs(*cl.value - half_pi) < 1e-5);
    check("semi-wave boundary slope matches the first integral",
          std::abs(solve_semiwave(0.0, 1.0, 1.0).slope0 - 1.0 / std::sqrt(3.0)) < 1e-4);

    ProblemSpec spec{1.0, 1.0, neu, m1, InitialProfile::bump(1.0, 0.5, 64, neu)};
    const double m_big = solution_bound(spec);
    bool bounds_ok = true, increasing = true;
    SimulateOptions sopts;
    double h_prev = 0.0;
    sopts.observer = [&](const FrontFixedState& s) {
        for (double w : s.w)
            if (w < 0.0 || w > m_big * (1.0 + 1e-8)) bounds_ok = false;
        if (s.hprime <= 0.0 || s.hprime > spec.mu * m_big * (1.0 + 1e-8)) bounds_ok = false;
        if (s.h <= h_prev) increasing = false;
        h_prev = s.h;
        return true;
    };
    Trajectory traj = simulate(spec, 5.0, 200, sopts);
    check("density and front speed stay inside their a-priori bounds", bounds_ok);
    check("front is strictly increasing", increasing);
    check("mass balance defect is small", traj.mass_residual.back() < 1e-2);

    json round = to_json(spec);
    check("problem spec JSON round-trips", to_json(spec_from_json(round)) == round);
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace
