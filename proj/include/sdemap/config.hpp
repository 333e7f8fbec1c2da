#pragma once

// Experiment configuration: a single JSON document describing one study
// (benchmark, horizon, parameter split, measurement options, estimators,
// replicate count, seeds, solver settings). Unknown keys are rejected, not
// ignored, and every rejection names the offending field. The resolved
// configuration has a canonical serialization whose FNV-1a hash is embedded
// in every output file, so results can be traced back to their inputs.

#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdemap/benchmarks.hpp"
#include "sdemap/sim.hpp"
#include "sdemap/solve.hpp"

namespace sdemap {

inline constexpr const char* tool_version = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string benchmark;
    double t_f = 0.0;
    std::uint64_t seed = 0;
    std::vector<Estimator> estimators;
    int grid_refinement = 0;
    int replicates = 1;
    bool known_given = false;               // replace the registry's default split
    std::map<std::string, double> known;    // parameter name -> fixed value
    MixtureOptions mixture;                 // duffing outlier benchmarks
    double l_b = 0.05;                      // holmes-rand quantization bin width
    double sigma_y_nominal = 0.05;          // holmes-rand nominal measurement scale
    SolverConfig solver;
    SimConfig sim;                          // seed is filled per replicate
    std::string output_dir = ".";
};

namespace detail {

using nlohmann::json;

inline double require_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
    return v.get<double>();
}

inline int require_int(const json& v, const std::string& field) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(field + ": expected an integer");
    return v.get<int>();
}

inline std::uint64_t require_u64(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(field + ": expected a non-negative integer");
}

inline std::string require_string(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field + ": expected a string");
    return v.get<std::string>();
}

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                                const std::string& scope) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown config key: " + scope + item.key());
    }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"benchmark", "t_f", "seed", "estimators", "grid_refinement", "replicates", "known",
         "measurement", "solver", "sim", "output_dir"},
        "");
    for (const char* req : {"benchmark", "t_f", "seed", "estimators"})
        if (!j.contains(req)) throw ConfigError(std::string("missing required field: ") + req);

    ExperimentConfig cfg;
    cfg.benchmark = detail::require_string(j["benchmark"], "benchmark");
    cfg.t_f = detail::require_number(j["t_f"], "t_f");
    if (!(cfg.t_f > 0.0)) throw ConfigError("t_f: must be positive");
    cfg.seed = detail::require_u64(j["seed"], "seed");

    if (!j["estimators"].is_array() || j["estimators"].empty())
        throw ConfigError("estimators: expected a non-empty array");
    for (const auto& e : j["estimators"]) {
        const std::string s = detail::require_string(e, "estimators");
        Estimator est;
        if (s == "map")
            est = Estimator::map;
        else if (s == "mee")
            est = Estimator::mee;
        else
            throw ConfigError("estimators: unknown estimator '" + s + "' (use \"map\" or \"mee\")");
        for (Estimator prev : cfg.estimators)
            if (prev == est) throw ConfigError("estimators: duplicate entry '" + s + "'");
        cfg.estimators.push_back(est);
    }

    if (j.contains("grid_refinement")) {
        cfg.grid_refinement = detail::require_int(j["grid_refinement"], "grid_refinement");
        if (cfg.grid_refinement < 0 || cfg.grid_refinement > 10)
            throw ConfigError("grid_refinement: must be in [0, 10]");
    }
    if (j.contains("replicates")) {
        cfg.replicates = detail::require_int(j["replicates"], "replicates");
        if (cfg.replicates < 1) throw ConfigError("replicates: must be >= 1");
    }
    if (j.contains("known")) {
        if (!j["known"].is_object()) throw ConfigError("known: expected an object");
        cfg.known_given = true;
        for (const auto& item : j["known"].items())
            cfg.known[item.key()] = detail::require_number(item.value(), "known." + item.key());
    }

    if (j.contains("measurement")) {
        const json& m = j["measurement"];
        if (!m.is_object()) throw ConfigError("measurement: expected an object");
        const bool outlier_family = cfg.benchmark == "duffing-student-t"
                                    || cfg.benchmark == "duffing-outlier-gaussian";
        const bool quantized_family = cfg.benchmark == "holmes-rand";
        for (const auto& item : m.items()) {
            const std::string field = "measurement." + item.key();
            const double v = detail::require_number(item.value(), field);
            if (item.key() == "p_o" || item.key() == "sigma_o" || item.key() == "sigma_r") {
                if (!outlier_family)
                    throw ConfigError(field + ": only applies to the outlier-mixture benchmarks");
                if (item.key() == "p_o") {
                    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field + ": must be in [0, 1]");
                    cfg.mixture.p_o = v;
                } else if (!(v > 0.0)) {
                    throw ConfigError(field + ": must be positive");
                } else if (item.key() == "sigma_o") {
                    cfg.mixture.sigma_o = v;
                } else {
                    cfg.mixture.sigma_r = v;
                }
            } else if (item.key() == "l_b" || item.key() == "sigma_y") {
                if (!quantized_family)
                    throw ConfigError(field + ": only applies to the quantized benchmark");
                if (!(v > 0.0)) throw ConfigError(field + ": must be positive");
                (item.key() == "l_b" ? cfg.l_b : cfg.sigma_y_nominal) = v;
            } else {
                throw ConfigError("unknown config key: measurement." + item.key());
            }
        }
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        if (!s.is_object()) throw ConfigError("solver: expected an object");
        detail::reject_unknown_keys(
            s, {"grad_tol", "max_iters", "sufficient_decrease", "curvature", "memory"}, "solver.");
        if (s.contains("grad_tol")) {
            cfg.solver.grad_tol = detail::require_number(s["grad_tol"], "solver.grad_tol");
            if (!(cfg.solver.grad_tol > 0.0)) throw ConfigError("solver.grad_tol: must be positive");
        }
        if (s.contains("max_iters")) {
            cfg.solver.max_iters = detail::require_int(s["max_iters"], "solver.max_iters");
            if (cfg.solver.max_iters < 1) throw ConfigError("solver.max_iters: must be >= 1");
        }
        if (s.contains("sufficient_decrease"))
            cfg.solver.sufficient_decrease =
                detail::require_number(s["sufficient_decrease"], "solver.sufficient_decrease");
        if (s.contains("curvature"))
            cfg.solver.curvature = detail::require_number(s["curvature"], "solver.curvature");
        if (!(cfg.solver.sufficient_decrease > 0.0
              && cfg.solver.sufficient_decrease < cfg.solver.curvature
              && cfg.solver.curvature < 1.0))
            throw ConfigError(
                "solver.sufficient_decrease/solver.curvature: need 0 < sufficient_decrease < curvature < 1");
        if (s.contains("memory")) {
            cfg.solver.memory = detail::require_int(s["memory"], "solver.memory");
            if (cfg.solver.memory < 1) throw ConfigError("solver.memory: must be >= 1");
        }
    }

    if (j.contains("sim")) {
        const json& s = j["sim"];
        if (!s.is_object()) throw ConfigError("sim: expected an object");
        detail::reject_unknown_keys(s, {"h_sim", "scheme"}, "sim.");
        if (s.contains("h_sim")) {
            cfg.sim.h_sim = detail::require_number(s["h_sim"], "sim.h_sim");
            if (!(cfg.sim.h_sim > 0.0)) throw ConfigError("sim.h_sim: must be positive");
        }
        if (s.contains("scheme")) {
            const std::string name = detail::require_string(s["scheme"], "sim.scheme");
            if (name == "euler_maruyama")
                cfg.sim.scheme = SimScheme::euler_maruyama;
            else if (name == "order15_additive")
                cfg.sim.scheme = SimScheme::order15_additive;
            else
                throw ConfigError("sim.scheme: unknown scheme '" + name + "'");
        }
    }

    if (j.contains("output_dir"))
        cfg.output_dir = detail::require_string(j["output_dir"], "output_dir");

    return cfg;
}

// Builds the benchmark problem the config describes. Registry lookup, the
// known/unknown split, and the measurement options are all applied and
// checked here; compute never starts from an invalid config.
inline BenchmarkSpec make_spec(const ExperimentConfig& cfg) {
    BenchmarkOptions opt;
    opt.mixture = cfg.mixture;
    opt.sigma_y_nominal = cfg.sigma_y_nominal;
    opt.l_b = cfg.l_b;
    BenchmarkSpec spec;
    try {
        spec = make_benchmark(cfg.benchmark, cfg.t_f, opt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("benchmark: ") + e.what());
    }
    if (cfg.known_given) {
        for (const auto& [name, value] : cfg.known) {
            int i = -1;
            try {
                i = spec.params.index_of(name);
            } catch (const std::invalid_argument&) {
                throw ConfigError("known." + name + ": not a parameter of " + cfg.benchmark);
            }
            spec.params.nominal(i) = value;
        }
        for (int i = 0; i < spec.params.full_dim(); ++i)
            spec.params.unknown[static_cast<std::size_t>(i)] =
                cfg.known.find(spec.params.names[static_cast<std::size_t>(i)]) == cfg.known.end();
    }
    // positive-scale parameters cannot be fixed at non-positive values
    if (!spec.prior.support_indicator(VectorXd::Zero(spec.dynamics.n),
                                      VectorXd::Zero(spec.dynamics.q), spec.params.nominal))
        throw ConfigError("known: fixed parameter values leave the prior support");
    const long long sub = std::llround(spec.t_s / cfg.sim.h_sim);
    if (sub < 1 || std::abs(static_cast<double>(sub) * cfg.sim.h_sim - spec.t_s) > 1e-9)
        throw ConfigError("sim.h_sim: must divide the sampling period "
                          + std::to_string(spec.t_s));
    return spec;
}

// Canonical serialization of the resolved configuration (defaults
// materialized, keys sorted, output location excluded: where files land is
// not part of the experiment's identity).
inline nlohmann::json config_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    json j;
    j["benchmark"] = cfg.benchmark;
    j["t_f"] = cfg.t_f;
    j["seed"] = cfg.seed;
    json est = json::array();
    for (Estimator e : cfg.estimators) est.push_back(estimator_name(e));
    j["estimators"] = est;
    j["grid_refinement"] = cfg.grid_refinement;
    j["replicates"] = cfg.replicates;
    if (cfg.known_given) {
        json k = json::object();
        for (const auto& [name, value] : cfg.known) k[name] = value;
        j["known"] = k;
    }
    if (cfg.benchmark == "duffing-student-t" || cfg.benchmark == "duffing-outlier-gaussian")
        j["measurement"] = {{"p_o", cfg.mixture.p_o},
                            {"sigma_o", cfg.mixture.sigma_o},
                            {"sigma_r", cfg.mixture.sigma_r}};
    if (cfg.benchmark == "holmes-rand")
        j["measurement"] = {{"l_b", cfg.l_b}, {"sigma_y", cfg.sigma_y_nominal}};
    j["solver"] = {{"grad_tol", cfg.solver.grad_tol},
                   {"max_iters", cfg.solver.max_iters},
                   {"sufficient_decrease", cfg.solver.sufficient_decrease},
                   {"curvature", cfg.solver.curvature},
                   {"memory", cfg.solver.memory}};
    j["sim"] = {{"h_sim", cfg.sim.h_sim}, {"scheme", scheme_name(cfg.sim.scheme)}};
    return j;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_json(cfg).dump())));
    return buf;
}

}  // namespace sdemap
