#pragma once

/// @file engine.hpp
/// @brief GA primitives: fitness sort, truncation selection with one elite,
/// Gaussian mutation, and the generation step that asks a mutation-rate
/// controller which sigma each child gets.
///
/// No crossover. The elite is never re-evaluated; objectives are deterministic.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gesmr/errors.hpp"
#include "gesmr/objectives.hpp"
#include "gesmr/rng.hpp"

namespace gesmr {

/// N+1 solutions with aligned cached objective values.
struct SolutionPopulation {
    std::vector<Vector> members;
    Vector values;
    std::size_t generation = 0;
    std::uint64_t evaluations = 0;
    bool fresh = false;

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    /// N, the number of non-elite slots.
    [[nodiscard]] std::size_t offspring() const noexcept { return members.empty() ? 0 : members.size() - 1; }
    [[nodiscard]] std::size_t dim() const noexcept { return members.empty() ? 0 : members.front().size(); }

    [[nodiscard]] double best_value() const {
        return *std::min_element(values.begin(), values.end());
    }
    [[nodiscard]] double mean_value() const {
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
};

struct EvolutionParams {
    std::size_t population_size = 64;      // N
    double solution_selection_rate = 0.5;  // eta_x
    std::size_t generations = 100;
    std::uint64_t seed = 0;
    double init_std = 1.0;
    std::size_t workers = 1;
};

/// m = floor(eta_x * N), at least 1.
inline std::size_t parent_pool_size(std::size_t n, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("solution selection rate must lie in (0, 1]");
    const auto m = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n) + 1e-12));
    return std::max<std::size_t>(m, 1);
}

/// Worker count from GESMR_WORKERS, default 1.
inline std::size_t workers_from_env() {
    if (const char* s = std::getenv("GESMR_WORKERS")) {
        const long v = std::strtol(s, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

/// Runs fn(i) for i in [begin, end) on up to @p workers threads.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t workers, Fn&& fn) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (workers <= 1 || n < 2) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::size_t w = std::min(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(w);
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t t = 0; t < w; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (std::size_t i = begin + t; i < end; i += w) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Samples N+1 members from N(0, init_std^2 I) and evaluates them.
inline SolutionPopulation initial_population(const Objective& obj, const EvolutionParams& params,
                                             const RngStream& rng) {
    if (params.population_size == 0) throw ConfigError("population size must be positive");
    SolutionPopulation pop;
    const std::size_t count = params.population_size + 1;
    pop.members.resize(count);
    pop.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto engine = rng.engine(Purpose::init, 0, i);
        std::normal_distribution<double> normal(0.0, 1.0);
        pop.members[i].resize(obj.dim());
        for (auto& v : pop.members[i]) v = params.init_std * normal(engine);
    }
    parallel_for(0, count, params.workers, [&](std::size_t i) { pop.values[i] = obj.evaluate(pop.members[i]); });
    pop.evaluations = count;
    pop.fresh = true;
    return pop;
}

/// Stable ascending order of cached values: order[r] is the index of the r-th best member.
inline std::vector<std::size_t> fitness_order(const SolutionPopulation& pop) {
    if (!pop.fresh || pop.values.size() != pop.members.size())
        throw InternalError("population values are stale; evaluate before sorting");
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop.values[a] < pop.values[b]; });
    return order;
}

inline SolutionPopulation sort_by_fitness(const SolutionPopulation& pop) {
    const auto order = fitness_order(pop);
    SolutionPopulation out = pop;
    for (std::size_t r = 0; r < order.size(); ++r) {
        out.members[r] = pop.members[order[r]];
        out.values[r] = pop.values[order[r]];
    }
    return out;
}

/// Parent indices into a sorted population: slot 0 is the elite, slots
/// 1..N are uniform with replacement over the top m.
template <class Engine>
std::vector<std::size_t> truncation_parents(std::size_t n, double eta, Engine& engine) {
    const std::size_t m = parent_pool_size(n, eta);
    if (m > n + 1) throw ConfigError("parent pool larger than population");
    std::vector<std::size_t> parents(n + 1, 0);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t i = 1; i <= n; ++i) parents[i] = pick(engine);
    return parents;
}

template <class Engine>
SolutionPopulation truncation_select(const SolutionPopulation& sorted, double eta, Engine& engine) {
    if (sorted.size() < 1) throw ConfigError("cannot select from an empty population");
    const auto parents = truncation_parents(sorted.offspring(), eta, engine);
    SolutionPopulation out = sorted;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        out.members[i] = sorted.members[parents[i]];
        out.values[i] = sorted.values[parents[i]];
    }
    return out;
}

/// x + sigma * eps, eps ~ N(0, I).
template <class Engine>
Vector gaussian_mutate(std::span<const double> x, double sigma, Engine& engine) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("mutation rate must be nonnegative");
    Vector out(x.begin(), x.end());
    if (sigma == 0.0) return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out) v += sigma * normal(engine);
    return out;
}

/// What a controller sees when asked for mutation rates.
///
/// lineage[i] is the index, in the population *before* sorting, of the
/// parent that slot i of the next generation was copied from (slot 0 is the
/// elite). Controllers that carry per-individual state use it to move that
/// state along with the solutions.
struct SelectionInfo {
    std::size_t generation;
    std::size_t offspring;
    std::span<const std::size_t> lineage;
    const RngStream* rng;
};

/// Contract every mutation-rate strategy satisfies.
///   propose: one sigma for each of slots 1..N (size N, all > 0).
///   observe: per-slot delta_i = f(child_i) - f(parent_i) for slots 1..N.
///   rates:   the current MR population, summarized in traces.
template <class C>
concept MutationRateController =
    requires(C c, const C cc, const SelectionInfo& info, std::span<const double> deltas) {
        { c.propose(info) } -> std::convertible_to<Vector>;
        c.observe(info, deltas);
        { cc.rates() } -> std::convertible_to<Vector>;
    };

template <class C>
concept ReportsGroupDeltas = requires(const C cc) {
    { cc.last_group_deltas() } -> std::convertible_to<Vector>;
};

/// Per-generation statistics.
struct GenerationTrace {
    std::size_t generation = 0;
    double elite_f = 0.0;
    double mean_f = 0.0;
    double mean_log10_mr = 0.0;
    double min_mr = 0.0;
    double max_mr = 0.0;
    std::uint64_t cum_evals = 0;
    Vector group_deltas;

    friend bool operator==(const GenerationTrace&, const GenerationTrace&) = default;
};

inline GenerationTrace summarize(const SolutionPopulation& pop, std::span<const double> rates) {
    GenerationTrace t;
    t.generation = pop.generation;
    t.elite_f = pop.best_value();
    t.mean_f = pop.mean_value();
    t.cum_evals = pop.evaluations;
    if (!rates.empty()) {
        double s = 0.0;
        t.min_mr = std::numeric_limits<double>::infinity();
        t.max_mr = 0.0;
        for (double r : rates) {
            s += std::log10(r);
            t.min_mr = std::min(t.min_mr, r);
            t.max_mr = std::max(t.max_mr, r);
        }
        t.mean_log10_mr = s / static_cast<double>(rates.size());
    }
    return t;
}

template <MutationRateController C>
GenerationTrace summarize(const SolutionPopulation& pop, const C& controller) {
    const Vector r = controller.rates();
    return summarize(pop, r);
}

/// Smallest positive MR accepted from a controller.
inline constexpr double min_positive_rate = 1e-300;

/// One generation: sort, select, mutate non-elites with the controller's
/// sigmas, evaluate the N children, report deltas. Uses exactly N evaluations.
template <MutationRateController C>
GenerationTrace ga_step(SolutionPopulation& pop, const EvolutionParams& params, C& controller, const Objective& obj,
                        const RngStream& rng) {
    const std::size_t n = pop.offspring();
    if (n == 0) throw ConfigError("population needs at least one non-elite member");
    const auto order = fitness_order(pop);
    const std::size_t t = pop.generation;

    auto sel_engine = rng.engine(Purpose::selection, t);
    const auto parents = truncation_parents(n, params.solution_selection_rate, sel_engine);
    std::vector<std::size_t> lineage(n + 1);
    for (std::size_t i = 0; i <= n; ++i) lineage[i] = order[parents[i]];

    const SelectionInfo info{t, n, lineage, &rng};
    const Vector sigmas = controller.propose(info);
    if (sigmas.size() != n) throw InternalError("controller proposed the wrong number of mutation rates");
    for (double s : sigmas)
        if (!(s > min_positive_rate) || !std::isfinite(s))
            throw InternalError("controller proposed a non-positive or non-finite mutation rate");

    SolutionPopulation next;
    next.members.resize(n + 1);
    next.values.resize(n + 1);
    next.members[0] = pop.members[lineage[0]];
    next.values[0] = pop.values[lineage[0]];
    Vector deltas(n);
    parallel_for(1, n + 1, params.workers, [&](std::size_t i) {
        auto engine = rng.engine(Purpose::mutation, t, i);
        next.members[i] = gaussian_mutate(pop.members[lineage[i]], sigmas[i - 1], engine);
        next.values[i] = obj.evaluate(next.members[i]);
        deltas[i - 1] = next.values[i] - pop.values[lineage[i]];
    });
    next.generation = t + 1;
    next.evaluations = pop.evaluations + n;
    next.fresh = true;

    controller.observe(info, deltas);
    pop = std::move(next);

    GenerationTrace trace = summarize(pop, controller);
    if constexpr (ReportsGroupDeltas<C>) trace.group_deltas = controller.last_group_deltas();
    return trace;
}

/// Full run from a fresh seeded population. Returns generations+1 records
/// (record 0 describes the initial population).
template <MutationRateController C>
std::vector<GenerationTrace> evolve(const Objective& obj, const EvolutionParams& params, C& controller,
                                    SolutionPopulation* final_population = nullptr) {
    const RngStream rng(params.seed);
    SolutionPopulation pop = initial_population(obj, params, rng);
    std::vector<GenerationTrace> traces;
    traces.reserve(params.generations + 1);
    traces.push_back(summarize(pop, controller));
    for (std::size_t g = 0; g < params.generations; ++g) traces.push_back(ga_step(pop, params, controller, obj, rng));
    if (final_population) *final_population = std::move(pop);
    return traces;
}

} // namespace gesmr
