#pragma once

/// @file config.hpp
/// @brief RunConfig: everything that determines a run, as JSON.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gesmr/analysis.hpp"
#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"
#include "gesmr/objectives.hpp"

namespace gesmr {

struct ObjectiveConfig {
    std::string name = "sphere";
    std::size_t dim = 10;
    std::vector<std::size_t> mlp_layers = {2, 8, 1};

    friend bool operator==(const ObjectiveConfig&, const ObjectiveConfig&) = default;
};

struct AlgorithmConfig {
    std::string name = "gesmr";
    std::optional<std::size_t> groups;  // K; defaults to the divisor of N nearest sqrt(N)
    double mr_selection_rate = 0.5;
    double meta_mr = 2.0;
    double init_lo = 1e-2;
    double init_hi = 1e2;
    std::optional<double> sigma;        // fmr rate / 15mr starting rate
    Vector ucb_arms = log_spaced(1e-4, 1e2, 9);
    double ucb_exploration = std::sqrt(2.0);

    friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

struct RunConfig {
    ObjectiveConfig objective;
    double init_std = 1.0;
    AlgorithmConfig algorithm;
    std::size_t population_size = 64;
    double solution_selection_rate = 0.5;
    std::size_t generations = 100;
    std::vector<std::uint64_t> seeds = {0};

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline const std::vector<std::string>& controller_names() {
    static const std::vector<std::string> names = {"gesmr", "gesmr-avg", "gesmr-fix", "samr",
                                                   "fmr",   "1cmr",      "15mr",      "ucb"};
    return names;
}

inline bool is_group_based(const std::string& algorithm) {
    return algorithm == "gesmr" || algorithm == "gesmr-avg" || algorithm == "gesmr-fix";
}

inline bool is_oracle(const std::string& algorithm) { return algorithm == "ofmr" || algorithm == "lamr"; }

/// Validates names and ranges and fills in defaults. Throws ConfigError.
inline RunConfig resolve(RunConfig c) {
    parse_objective_kind(c.objective.name);
    const auto& names = controller_names();
    if (std::find(names.begin(), names.end(), c.algorithm.name) == names.end() && !is_oracle(c.algorithm.name))
        throw ConfigError("unknown algorithm '" + c.algorithm.name +
                          "' (expected gesmr, gesmr-avg, gesmr-fix, samr, fmr, 1cmr, 15mr or ucb)");
    if (c.population_size == 0) throw ConfigError("population_size must be positive");
    if (c.objective.dim == 0) throw ConfigError("objective dim must be positive");
    if (!(c.init_std > 0.0)) throw ConfigError("init_std must be positive");
    if (c.seeds.empty()) throw ConfigError("at least one seed is required");
    parent_pool_size(c.population_size, c.solution_selection_rate);
    if (c.objective.name == "mlp_task" || c.objective.name == "mlp") {
        c.objective.name = "mlp_task";
        const auto spec = make_default_mlp_task(0, c.objective.mlp_layers, 1);
        if (spec.parameter_count() != c.objective.dim)
            throw ConfigError("mlp_task layers give " + std::to_string(spec.parameter_count()) +
                              " parameters but dim is " + std::to_string(c.objective.dim));
    }
    if (is_group_based(c.algorithm.name)) {
        if (!c.algorithm.groups) c.algorithm.groups = default_groups(c.population_size);
        const std::size_t k = *c.algorithm.groups;
        if (k == 0 || c.population_size % k != 0)
            throw ConfigError("K=" + std::to_string(k) + " does not divide N=" + std::to_string(c.population_size) +
                              "; nearest valid K is " +
                              std::to_string(nearest_divisor(c.population_size, static_cast<double>(k))));
        mr_parent_pool_size(k, c.algorithm.mr_selection_rate);
    }
    if (!(c.algorithm.init_lo > 0.0) || c.algorithm.init_lo > c.algorithm.init_hi)
        throw ConfigError("MR init range must satisfy 0 < init_lo <= init_hi");
    if (!(c.algorithm.meta_mr >= 1.0)) throw ConfigError("meta_mr (tau) must be >= 1");
    if (c.algorithm.name == "fmr" && !c.algorithm.sigma) c.algorithm.sigma = 0.01;
    if (c.algorithm.name == "15mr" && !c.algorithm.sigma) c.algorithm.sigma = 0.01;
    if (c.algorithm.sigma && !(*c.algorithm.sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (c.algorithm.name == "ucb") make_bandit(c.algorithm.ucb_arms, c.algorithm.ucb_exploration);
    return c;
}

inline EvolutionParams evolution_params(const RunConfig& c, std::uint64_t seed, std::size_t workers = 1) {
    EvolutionParams p;
    p.population_size = c.population_size;
    p.solution_selection_rate = c.solution_selection_rate;
    p.generations = c.generations;
    p.seed = seed;
    p.init_std = c.init_std;
    p.workers = workers;
    return p;
}

inline GesmrParams gesmr_params(const AlgorithmConfig& a) {
    GesmrParams g;
    g.groups = a.groups.value_or(1);
    g.mr_selection_rate = a.mr_selection_rate;
    g.meta_mr = a.meta_mr;
    g.init_lo = a.init_lo;
    g.init_hi = a.init_hi;
    g.aggregation = a.name == "gesmr-avg" ? Aggregation::mean : Aggregation::min;
    g.frozen = a.name == "gesmr-fix";
    return g;
}

/// Controller for a resolved config.
inline AnyController make_controller(const RunConfig& c) {
    const auto& a = c.algorithm;
    if (is_group_based(a.name)) return GesmrController(gesmr_params(a), c.population_size);
    if (a.name == "samr") return SamrController(c.population_size, a.meta_mr, a.init_lo, a.init_hi);
    if (a.name == "fmr") return FixedRateController(a.sigma.value_or(0.01));
    if (a.name == "1cmr") return one_over_d(c.objective.dim);
    if (a.name == "15mr") return FifteenRuleController(a.sigma.value_or(0.01));
    if (a.name == "ucb") return UcbController(a.ucb_arms, a.ucb_exploration);
    throw ConfigError("algorithm '" + a.name + "' has no online controller");
}

inline Objective make_objective(const ObjectiveConfig& o, std::uint64_t seed) {
    return make_objective(o.name, o.dim, seed, o.mlp_layers);
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

inline json to_json(const RunConfig& c) {
    json a = {{"name", c.algorithm.name},
              {"mr_selection_rate", c.algorithm.mr_selection_rate},
              {"meta_mr", c.algorithm.meta_mr},
              {"init_lo", c.algorithm.init_lo},
              {"init_hi", c.algorithm.init_hi},
              {"ucb_arms", c.algorithm.ucb_arms},
              {"ucb_exploration", c.algorithm.ucb_exploration}};
    if (c.algorithm.groups) a["groups"] = *c.algorithm.groups;
    if (c.algorithm.sigma) a["sigma"] = *c.algorithm.sigma;
    json o = {{"name", c.objective.name}, {"dim", c.objective.dim}};
    if (c.objective.name == "mlp_task") o["mlp_layers"] = c.objective.mlp_layers;
    return {{"objective", o},
            {"init_std", c.init_std},
            {"algorithm", a},
            {"population_size", c.population_size},
            {"solution_selection_rate", c.solution_selection_rate},
            {"generations", c.generations},
            {"seeds", c.seeds}};
}

namespace detail {
template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}
} // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const json& j) {
    static const std::vector<std::string> top = {"objective",       "init_std",
                                                 "algorithm",       "population_size",
                                                 "solution_selection_rate", "generations",
                                                 "seeds"};
    static const std::vector<std::string> alg = {"name",    "groups", "mr_selection_rate", "meta_mr",
                                                 "init_lo", "init_hi", "sigma",            "ucb_arms",
                                                 "ucb_exploration"};
    static const std::vector<std::string> obj = {"name", "dim", "mlp_layers"};
    auto check = [](const json& node, const std::vector<std::string>& allowed, const std::string& where) {
        if (!node.is_object()) throw ConfigError(where + " must be an object");
        for (const auto& [k, v] : node.items())
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                throw ConfigError("unknown key '" + k + "' in " + where);
    };
    try {
        check(j, top, "config");
        RunConfig c;
        if (j.contains("objective")) {
            const auto& o = j.at("objective");
            check(o, obj, "objective");
            detail::read_if(o, "name", c.objective.name);
            detail::read_if(o, "dim", c.objective.dim);
            detail::read_if(o, "mlp_layers", c.objective.mlp_layers);
        }
        detail::read_if(j, "init_std", c.init_std);
        if (j.contains("algorithm")) {
            const auto& a = j.at("algorithm");
            check(a, alg, "algorithm");
            detail::read_if(a, "name", c.algorithm.name);
            if (a.contains("groups")) c.algorithm.groups = a.at("groups").get<std::size_t>();
            detail::read_if(a, "mr_selection_rate", c.algorithm.mr_selection_rate);
            detail::read_if(a, "meta_mr", c.algorithm.meta_mr);
            detail::read_if(a, "init_lo", c.algorithm.init_lo);
            detail::read_if(a, "init_hi", c.algorithm.init_hi);
            if (a.contains("sigma")) c.algorithm.sigma = a.at("sigma").get<double>();
            detail::read_if(a, "ucb_arms", c.algorithm.ucb_arms);
            detail::read_if(a, "ucb_exploration", c.algorithm.ucb_exploration);
        }
        detail::read_if(j, "population_size", c.population_size);
        detail::read_if(j, "solution_selection_rate", c.solution_selection_rate);
        detail::read_if(j, "generations", c.generations);
        detail::read_if(j, "seeds", c.seeds);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2); }

inline RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace gesmr
