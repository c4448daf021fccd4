#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stefan/problem.hpp"

namespace stefan {

// JSON round-trip for problem specifications.  Field names are part of the
// file format and must not drift:
//   top level     "d", "mu", "h0", "alpha", "beta", "m", "u0"
//   growth union  tagged by "kind" in {"constant", "piecewise_linear",
//                 "patchy", "algebraic_floor", "tail_prescribed"}
//   initial data  "u0": {"h0": ..., "samples": [...]} on a uniform grid

inline nlohmann::json to_json(const GrowthProfile& m) {
    nlohmann::json j;
    std::visit(
        [&j](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ConstantGrowth>) {
                j["kind"] = "constant";
                j["c"] = g.c;
            } else if constexpr (std::is_same_v<T, PiecewiseLinearGrowth>) {
                j["kind"] = "piecewise_linear";
                auto& arr = j["knots"] = nlohmann::json::array();
                for (const auto& [x, v] : g.knots) arr.push_back({x, v});
            } else if constexpr (std::is_same_v<T, PatchyGrowth>) {
                j["kind"] = "patchy";
                j["rho"] = g.rho;
                auto& arr = j["intervals"] = nlohmann::json::array();
                for (const auto& [a, b] : g.intervals) arr.push_back({a, b});
                j["background"] = g.background;
                j["ramp"] = g.ramp;
            } else if constexpr (std::is_same_v<T, AlgebraicFloorGrowth>) {
                j["kind"] = "algebraic_floor";
                j["rho"] = g.rho;
                j["gamma"] = g.gamma;
                j["interval_factor"] = g.k;
                j["anchors"] = g.anchors;
                j["background"] = g.background;
                j["ramp"] = g.ramp;
            } else {
                j["kind"] = "tail_prescribed";
                j["gamma"] = g.gamma;
                j["m1"] = g.m1;
                j["m2"] = g.m2;
                j["core"] = g.core;
                j["core_length"] = g.core_length;
                j["omega"] = g.omega;
            }
        },
        m.kind());
    return j;
}

inline GrowthProfile growth_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        return GrowthProfile(ConstantGrowth{j.at("c").get<double>()});
    }
    if (kind == "piecewise_linear") {
        PiecewiseLinearGrowth g;
        for (const auto& pair : j.at("knots"))
            g.knots.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        return GrowthProfile(std::move(g));
    }
    if (kind == "patchy") {
        PatchyGrowth g;
        g.rho = j.at("rho").get<double>();
        for (const auto& pair : j.at("intervals"))
            g.intervals.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        g.background = j.at("background").get<double>();
        g.ramp = j.value("ramp", 1.0);
        return GrowthProfile(std::move(g));
    }
    if (kind == "algebraic_floor") {
        AlgebraicFloorGrowth g;
        g.rho = j.at("rho").get<double>();
        g.gamma = j.at("gamma").get<double>();
        g.k = j.at("interval_factor").get<double>();
        g.anchors = j.at("anchors").get<std::vector<double>>();
        g.background = j.at("background").get<double>();
        g.ramp = j.value("ramp", 1.0);
        return GrowthProfile(std::move(g));
    }
    if (kind == "tail_prescribed") {
        TailPrescribedGrowth g;
        g.gamma = j.at("gamma").get<double>();
        g.m1 = j.at("m1").get<double>();
        g.m2 = j.at("m2").get<double>();
        g.core = j.at("core").get<std::vector<double>>();
        g.core_length = j.at("core_length").get<double>();
        g.omega = j.value("omega", 1.0);
        return GrowthProfile(std::move(g));
    }
    throw std::invalid_argument("growth profile: unknown kind \"" + kind + "\"");
}

inline nlohmann::json to_json(const ProblemSpec& spec) {
    nlohmann::json j;
    j["d"] = spec.d;
    j["mu"] = spec.mu;
    j["h0"] = spec.u0.h0;
    j["alpha"] = spec.boundary.alpha();
    j["beta"] = spec.boundary.beta();
    j["m"] = to_json(spec.m);
    j["u0"] = {{"h0", spec.u0.h0}, {"samples", spec.u0.samples}};
    return j;
}

inline ProblemSpec spec_from_json(const nlohmann::json& j) {
    const auto& u0j = j.at("u0");
    InitialProfile u0(u0j.at("h0").get<double>(),
                      u0j.at("samples").get<std::vector<double>>());
    if (j.contains("h0")) {
        const double top = j.at("h0").get<double>();
        if (std::abs(top - u0.h0) > 1e-12 * std::max(1.0, std::abs(top)))
            throw std::invalid_argument(
                "problem spec: top-level h0 disagrees with u0.h0");
    }
    return ProblemSpec{j.at("d").get<double>(), j.at("mu").get<double>(),
                       BoundaryOperator(j.at("alpha").get<double>(), j.at("beta").get<double>()),
                       growth_from_json(j.at("m")), std::move(u0)};
}

}  // namespace stefan
