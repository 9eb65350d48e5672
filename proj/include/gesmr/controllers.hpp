#pragma once

/// @file controllers.hpp
/// @brief Online mutation-rate strategies.
///
/// GESMR and its two ablations (mean aggregation, frozen pool), per-solution
/// self-adaptation (SAMR), the one-fifth success rule, a UCB bandit over a
/// fixed set of rates, and constant rates. All satisfy MutationRateController.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"
#include "gesmr/rng.hpp"

namespace gesmr {

/// Multiplicative updates are kept inside this band so a long run can never
/// underflow to zero or overflow to infinity.
inline constexpr double rate_floor = 1e-290;
inline constexpr double rate_ceiling = 1e290;

inline double clamp_rate(double sigma) { return std::clamp(sigma, rate_floor, rate_ceiling); }

/// sigma * tau^eps, eps ~ U(-1, 1).
template <class Engine>
double meta_mutate(double sigma, double tau, Engine& engine) {
    const double eps = uniform_open_pm1(engine);
    return clamp_rate(sigma * std::pow(tau, eps));
}

/// `count` values log-spaced from lo to hi inclusive; count == 1 gives the geometric mean.
inline Vector log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("log-spaced range must be positive");
    if (lo > hi) throw std::invalid_argument("log-spaced range must satisfy lo <= hi");
    if (count == 0) throw std::invalid_argument("log-spaced grid needs at least one point");
    Vector out(count);
    if (count == 1) {
        out[0] = std::sqrt(lo) * std::sqrt(hi);
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t k = 0; k < count; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(count - 1);
        out[k] = std::pow(10.0, a + u * (b - a));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

// ---------------------------------------------------------------------------
// GESMR

enum class Aggregation { min, mean };

struct GesmrParams {
    std::size_t groups = 8;            // K
    double mr_selection_rate = 0.5;    // eta_sigma
    double meta_mr = 2.0;              // tau
    double init_lo = 1e-2;
    double init_hi = 1e2;
    Aggregation aggregation = Aggregation::min;
    bool frozen = false;
};

/// K strictly positive rates; rate k drives the k-th block of N/K children.
struct MutationRatePool {
    Vector rates;
    std::size_t group_size = 1;

    [[nodiscard]] std::size_t groups() const noexcept { return rates.size(); }
    friend bool operator==(const MutationRatePool&, const MutationRatePool&) = default;
};

/// 1-based group of 1-based child index i: ceil(i*K/N).
inline std::size_t gesmr_group_of(std::size_t i, std::size_t n, std::size_t k) {
    if (i < 1 || i > n) throw std::out_of_range("child index must lie in 1..N");
    return (i * k + n - 1) / n;
}

inline double gesmr_assign(const MutationRatePool& pool, std::size_t i) {
    const std::size_t k = pool.groups();
    return pool.rates[gesmr_group_of(i, k * pool.group_size, k) - 1];
}

/// Per-group best (or mean) of child-minus-parent deltas over slots 1..N.
inline Vector gesmr_group_deltas(std::span<const double> deltas, std::size_t k,
                                 Aggregation aggregation = Aggregation::min) {
    if (k == 0 || deltas.size() % k != 0)
        throw InternalError("delta count " + std::to_string(deltas.size()) + " is not a multiple of K=" +
                            std::to_string(k));
    const std::size_t g = deltas.size() / k;
    Vector out(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto block = deltas.subspan(j * g, g);
        if (aggregation == Aggregation::min)
            out[j] = *std::min_element(block.begin(), block.end());
        else
            out[j] = std::accumulate(block.begin(), block.end(), 0.0) / static_cast<double>(g);
    }
    return out;
}

/// l = floor(eta_sigma * K), at least 1.
inline std::size_t mr_parent_pool_size(std::size_t k, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("MR selection rate must lie in (0, 1]");
    const auto l = static_cast<std::size_t>(std::floor(eta * static_cast<double>(k) + 1e-12));
    return std::max<std::size_t>(l, 1);
}

/// One round of the MR genetic algorithm: rank rates by delta, keep the best
/// unchanged, refill the other K-1 slots from the top l and meta-mutate them.
template <class Engine>
MutationRatePool gesmr_evolve_rates(const MutationRatePool& pool, std::span<const double> deltas,
                                    const GesmrParams& params, Engine& engine) {
    if (params.frozen) return pool;
    const std::size_t k = pool.groups();
    if (deltas.size() != k) throw InternalError("group deltas do not align with the MR pool");
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });

    const std::size_t l = mr_parent_pool_size(k, params.mr_selection_rate);
    std::uniform_int_distribution<std::size_t> pick(0, l - 1);
    MutationRatePool next = pool;
    next.rates[0] = pool.rates[order[0]];
    for (std::size_t j = 1; j < k; ++j) {
        const double parent = pool.rates[order[pick(engine)]];
        next.rates[j] = meta_mutate(parent, params.meta_mr, engine);
    }
    return next;
}

inline MutationRatePool gesmr_init(const GesmrParams& params, std::size_t population_size) {
    if (!(params.init_lo > 0.0)) throw std::invalid_argument("MR init range must be positive");
    if (params.groups == 0) throw ConfigError("K must be >= 1");
    if (population_size % params.groups != 0)
        throw ConfigError("K=" + std::to_string(params.groups) + " does not divide N=" +
                          std::to_string(population_size));
    return {log_spaced(params.init_lo, params.init_hi, params.groups), population_size / params.groups};
}

class GesmrController {
public:
    GesmrController(const GesmrParams& params, std::size_t population_size)
        : params_(params), pool_(gesmr_init(params, population_size)), initial_(pool_) {
        if (!(params.meta_mr >= 1.0)) throw ConfigError("meta mutation rate tau must be >= 1");
        mr_parent_pool_size(params.groups, params.mr_selection_rate);
    }

    Vector propose(const SelectionInfo& info) const {
        if (info.offspring != pool_.groups() * pool_.group_size)
            throw InternalError("population size changed under the GESMR controller");
        Vector sigmas(info.offspring);
        for (std::size_t i = 1; i <= info.offspring; ++i) sigmas[i - 1] = gesmr_assign(pool_, i);
        return sigmas;
    }

    void observe(const SelectionInfo& info, std::span<const double> deltas) {
        last_deltas_ = gesmr_group_deltas(deltas, pool_.groups(), params_.aggregation);
        auto engine = info.rng->engine(Purpose::controller, info.generation);
        pool_ = gesmr_evolve_rates(pool_, last_deltas_, params_, engine);
    }

    [[nodiscard]] Vector rates() const { return pool_.rates; }
    [[nodiscard]] Vector last_group_deltas() const { return last_deltas_; }
    [[nodiscard]] const MutationRatePool& pool() const noexcept { return pool_; }
    [[nodiscard]] const MutationRatePool& initial_pool() const noexcept { return initial_; }
    [[nodiscard]] const GesmrParams& params() const noexcept { return params_; }

private:
    GesmrParams params_;
    MutationRatePool pool_;
    MutationRatePool initial_;
    Vector last_deltas_;
};

// ---------------------------------------------------------------------------
// SAMR

/// One rate per solution, carried through selection with its solution and
/// meta-mutated before it is used on the child.
class SamrController {
public:
    SamrController(std::size_t population_size, double tau, double init_lo = 1e-2, double init_hi = 1e2)
        : tau_(tau), rates_(log_spaced(init_lo, init_hi, population_size + 1)) {
        if (!(tau >= 1.0)) throw ConfigError("meta mutation rate tau must be >= 1");
    }

    Vector propose(const SelectionInfo& info) {
        if (info.lineage.size() != rates_.size()) throw InternalError("SAMR rates do not align with the population");
        Vector next(rates_.size());
        next[0] = rates_[info.lineage[0]];
        for (std::size_t i = 1; i < next.size(); ++i) {
            auto engine = info.rng->engine(Purpose::controller, info.generation, i);
            next[i] = meta_mutate(rates_[info.lineage[i]], tau_, engine);
        }
        rates_ = std::move(next);
        return Vector(rates_.begin() + 1, rates_.end());
    }

    void observe(const SelectionInfo&, std::span<const double>) {}

    /// All N+1 per-solution rates, aligned with the current population.
    [[nodiscard]] Vector rates() const { return rates_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }

private:
    double tau_;
    Vector rates_;
};

// ---------------------------------------------------------------------------
// One-fifth success rule

/// Doubles sigma when strictly more than a fifth of mutations improved, else halves.
inline double fifteen_mr_update(double sigma, double beneficial_fraction) {
    if (beneficial_fraction < 0.0 || beneficial_fraction > 1.0)
        throw std::invalid_argument("beneficial fraction must lie in [0, 1]");
    return clamp_rate(beneficial_fraction > 0.2 ? 2.0 * sigma : 0.5 * sigma);
}

class FifteenRuleController {
public:
    explicit FifteenRuleController(double sigma0 = 0.01) : sigma_(sigma0) {
        if (!(sigma0 > 0.0)) throw ConfigError("initial mutation rate must be positive");
    }

    Vector propose(const SelectionInfo& info) const { return Vector(info.offspring, sigma_); }

    void observe(const SelectionInfo&, std::span<const double> deltas) {
        const auto good = std::count_if(deltas.begin(), deltas.end(), [](double d) { return d < 0.0; });
        sigma_ = fifteen_mr_update(sigma_, static_cast<double>(good) / static_cast<double>(deltas.size()));
    }

    [[nodiscard]] Vector rates() const { return {sigma_}; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
};

// ---------------------------------------------------------------------------
// UCB bandit

struct BanditArm {
    double sigma = 1.0;
    std::size_t pulls = 0;
    double reward_sum = 0.0;
};

struct BanditState {
    std::vector<BanditArm> arms;
    double exploration = std::sqrt(2.0);  // c
    double running_max = 0.0;
    std::size_t total_pulls = 0;

    [[nodiscard]] std::size_t size() const noexcept { return arms.size(); }
};

inline BanditState make_bandit(const Vector& sigmas, double exploration = std::sqrt(2.0)) {
    if (sigmas.size() < 2) throw ConfigError("UCB needs at least two arms");
    BanditState s;
    s.exploration = exploration;
    for (double v : sigmas) {
        if (!(v > 0.0)) throw ConfigError("UCB arm mutation rates must be positive");
        s.arms.push_back({v, 0, 0.0});
    }
    return s;
}

inline double ucb_score(const BanditState& s, std::size_t arm) {
    const auto& a = s.arms.at(arm);
    if (a.pulls == 0) return std::numeric_limits<double>::infinity();
    const double mean = a.reward_sum / static_cast<double>(a.pulls);
    return mean + s.exploration * std::sqrt(2.0 * std::log(static_cast<double>(s.total_pulls)) /
                                            static_cast<double>(a.pulls));
}

/// 0-based arm to pull next: warm-up in order, then highest score (first wins ties).
inline std::size_t ucb_step(const BanditState& s) {
    if (s.total_pulls < s.size()) return s.total_pulls;
    std::size_t best = 0;
    double best_score = ucb_score(s, 0);
    for (std::size_t a = 1; a < s.size(); ++a) {
        const double sc = ucb_score(s, a);
        if (sc > best_score) {
            best = a;
            best_score = sc;
        }
    }
    return best;
}

inline void ucb_observe_reward(BanditState& s, std::size_t arm, double reward) {
    auto& a = s.arms.at(arm);
    a.pulls += 1;
    a.reward_sum += reward;
    s.total_pulls += 1;
}

/// Reward is the generation's best improvement, max(0, -min delta), scaled
/// by the largest such improvement seen so far.
inline void ucb_observe(BanditState& s, std::size_t arm, std::span<const double> deltas) {
    double best = deltas.empty() ? 0.0 : *std::min_element(deltas.begin(), deltas.end());
    const double raw = std::max(0.0, -best);
    s.running_max = std::max(s.running_max, raw);
    ucb_observe_reward(s, arm, s.running_max > 0.0 ? raw / s.running_max : 0.0);
}

class UcbController {
public:
    explicit UcbController(const Vector& arm_sigmas, double exploration = std::sqrt(2.0))
        : state_(make_bandit(arm_sigmas, exploration)) {}

    Vector propose(const SelectionInfo& info) {
        arm_ = ucb_step(state_);
        return Vector(info.offspring, state_.arms[arm_].sigma);
    }

    void observe(const SelectionInfo&, std::span<const double> deltas) { ucb_observe(state_, arm_, deltas); }

    [[nodiscard]] Vector rates() const { return {state_.arms[arm_].sigma}; }
    [[nodiscard]] const BanditState& state() const noexcept { return state_; }

private:
    BanditState state_;
    std::size_t arm_ = 0;
};

// ---------------------------------------------------------------------------
// Constant rates

class FixedRateController {
public:
    explicit FixedRateController(double sigma) : sigma_(sigma) {
        if (!(sigma > 0.0)) throw ConfigError("fixed mutation rate must be positive");
    }

    Vector propose(const SelectionInfo& info) const { return Vector(info.offspring, sigma_); }
    void observe(const SelectionInfo&, std::span<const double>) {}
    [[nodiscard]] Vector rates() const { return {sigma_}; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    void set_sigma(double sigma) { sigma_ = sigma; }

private:
    double sigma_;
};

inline FixedRateController fmr() { return FixedRateController(0.01); }

inline FixedRateController one_over_d(std::size_t d) {
    if (d == 0) throw std::invalid_argument("dimension must be >= 1");
    return FixedRateController(1.0 / static_cast<double>(d));
}

// ---------------------------------------------------------------------------
// Runtime selection

/// Closed set of controllers selectable by name.
class AnyController {
public:
    using Variant = std::variant<GesmrController, SamrController, FifteenRuleController, UcbController,
                                 FixedRateController>;

    template <class C>
        requires std::constructible_from<Variant, C>
    AnyController(C c) : v_(std::move(c)) {}

    Vector propose(const SelectionInfo& info) {
        return std::visit([&](auto& c) -> Vector { return c.propose(info); }, v_);
    }
    void observe(const SelectionInfo& info, std::span<const double> deltas) {
        std::visit([&](auto& c) { c.observe(info, deltas); }, v_);
    }
    [[nodiscard]] Vector rates() const {
        return std::visit([](const auto& c) -> Vector { return c.rates(); }, v_);
    }
    [[nodiscard]] Vector last_group_deltas() const {
        if (const auto* g = std::get_if<GesmrController>(&v_)) return g->last_group_deltas();
        return {};
    }

    [[nodiscard]] const Variant& get() const noexcept { return v_; }

private:
    Variant v_;
};

static_assert(MutationRateController<GesmrController>);
static_assert(MutationRateController<SamrController>);
static_assert(MutationRateController<FifteenRuleController>);
static_assert(MutationRateController<UcbController>);
static_assert(MutationRateController<FixedRateController>);
static_assert(MutationRateController<AnyController>);

} // namespace gesmr
