#pragma once

/// @file oracles.hpp
/// @brief Foresight baselines: best fixed MR by grid search (OFMR) and the
/// look-ahead MR re-chosen every G generations (LAMR-G).
///
/// Both peek at future outcomes and are reference curves, not competitors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"
#include "gesmr/objectives.hpp"
#include "gesmr/rng.hpp"
#include "gesmr/stats.hpp"

namespace gesmr {

/// Nonempty, strictly increasing, positive.
struct MrGrid {
    Vector values;

    MrGrid() : values(log_spaced(1e-4, 1e2, 9)) {}
    explicit MrGrid(Vector v) : values(std::move(v)) {
        if (values.empty()) throw ConfigError("MR grid must not be empty");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0)) throw ConfigError("MR grid values must be positive");
            if (i > 0 && !(values[i] > values[i - 1])) throw ConfigError("MR grid must be strictly increasing");
        }
    }

    static MrGrid log_range(double lo, double hi, std::size_t count) { return MrGrid(log_spaced(lo, hi, count)); }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

struct LookaheadPlan {
    std::size_t period = 50;            // G
    std::size_t repeats_per_sigma = 3;
    MrGrid grid;
};

struct OfmrResult {
    double best_sigma = 0.0;
    std::size_t best_index = 0;
    Vector median_final_elite;                                // per grid value
    std::vector<std::vector<std::vector<GenerationTrace>>> traces;  // [sigma][seed]
};

/// Runs a full fixed-MR evolution for every grid value and seed; picks the
/// value with the lowest median final elite (smallest sigma wins ties).
inline OfmrResult ofmr_search(const MrGrid& grid, const Objective& obj, const EvolutionParams& params,
                              const std::vector<std::uint64_t>& seeds) {
    if (grid.size() == 0) throw ConfigError("MR grid must not be empty");
    if (seeds.empty()) throw ConfigError("OFMR needs at least one seed");
    OfmrResult out;
    out.traces.resize(grid.size());
    out.median_final_elite.resize(grid.size());
    const std::size_t legs = grid.size() * seeds.size();
    std::vector<std::vector<GenerationTrace>> flat(legs);
    parallel_for(0, legs, params.workers, [&](std::size_t leg) {
        EvolutionParams p = params;
        p.seed = seeds[leg % seeds.size()];
        p.workers = 1;
        FixedRateController c(grid.values[leg / seeds.size()]);
        flat[leg] = evolve(obj, p, c);
    });
    for (std::size_t j = 0; j < grid.size(); ++j) {
        Vector finals;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            auto& tr = flat[j * seeds.size() + s];
            finals.push_back(tr.back().elite_f);
            out.traces[j].push_back(std::move(tr));
        }
        out.median_final_elite[j] = median(finals);
    }
    out.best_index = argmin_first(out.median_final_elite);
    out.best_sigma = grid.values[out.best_index];
    return out;
}

struct LookaheadChoice {
    double sigma = 0.0;
    std::size_t index = 0;
    Vector mean_elite;                 // per grid value, after G generations
    std::uint64_t evaluations = 0;     // look-ahead cost only
};

/// Simulates `repeats` independent G-generation fixed-MR futures per grid
/// value from a copy of @p snapshot and returns the value with the best mean
/// elite. Each leg owns the stream rng.child(lookahead, sigma index, repeat).
inline LookaheadChoice lamr_choose(const SolutionPopulation& snapshot, const LookaheadPlan& plan, const Objective& obj,
                                   const EvolutionParams& params, const RngStream& rng) {
    if (!snapshot.fresh) throw InternalError("look-ahead snapshot must have fresh values");
    if (plan.repeats_per_sigma == 0) throw ConfigError("look-ahead repeats must be >= 1");
    if (plan.period == 0) throw ConfigError("look-ahead period G must be >= 1");
    const std::size_t k = plan.grid.size();
    const std::size_t r = plan.repeats_per_sigma;
    Vector finals(k * r);
    parallel_for(0, k * r, params.workers, [&](std::size_t leg) {
        const std::size_t j = leg / r;
        const RngStream leg_rng = rng.child(Purpose::lookahead, j, leg % r);
        EvolutionParams p = params;
        p.workers = 1;
        FixedRateController c(plan.grid.values[j]);
        SolutionPopulation pop = snapshot;
        for (std::size_t g = 0; g < plan.period; ++g) ga_step(pop, p, c, obj, leg_rng);
        finals[leg] = pop.best_value();
    });
    LookaheadChoice out;
    out.mean_elite.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < r; ++q) s += finals[j * r + q];
        out.mean_elite[j] = s / static_cast<double>(r);
    }
    out.index = argmin_first(out.mean_elite);
    out.sigma = plan.grid.values[out.index];
    out.evaluations = static_cast<std::uint64_t>(k * r * plan.period * snapshot.offspring());
    return out;
}

struct LamrResult {
    std::vector<GenerationTrace> traces;  // generations + 1 records
    Vector sigma_curve;                   // sigma used for each generation t -> t+1
    std::uint64_t lookahead_evaluations = 0;
};

/// Main evolution with the MR re-chosen by look-ahead at every multiple of G.
/// Record t carries the sigma in force for generation t -> t+1 (the last
/// record repeats the final one).
inline LamrResult lamr_run(const Objective& obj, const EvolutionParams& params, const LookaheadPlan& plan) {
    const RngStream rng(params.seed);
    SolutionPopulation pop = initial_population(obj, params, rng);
    FixedRateController c(plan.grid.values.front());
    LamrResult out;
    auto choose = [&] {
        const auto choice = lamr_choose(pop, plan, obj, params, rng.child(Purpose::lookahead, pop.generation));
        c.set_sigma(choice.sigma);
        out.lookahead_evaluations += choice.evaluations;
    };
    if (params.generations > 0) choose();
    out.traces.push_back(summarize(pop, c));
    for (std::size_t g = 0; g < params.generations; ++g) {
        out.sigma_curve.push_back(c.sigma());
        auto trace = ga_step(pop, params, c, obj, rng);
        if (pop.generation % plan.period == 0 && g + 1 < params.generations) choose();
        const double next = c.sigma();
        // the MR columns describe the rate for the coming generation
        trace.mean_log10_mr = std::log10(next);
        trace.min_mr = trace.max_mr = next;
        out.traces.push_back(std::move(trace));
    }
    return out;
}

} // namespace gesmr
