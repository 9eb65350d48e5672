#pragma once

/// @file analysis.hpp
/// @brief Mutation-effect analyses: the distribution of delta(x, sigma) =
/// f(x + sigma*eps) - f(x) across a sigma grid, the mean and best-of-q MR
/// objectives derived from it, the Monte-Carlo check that E[min of q
/// N(0, sigma^2)] scales linearly in sigma, the log-MR error metric, and the
/// GESMR group-count sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"
#include "gesmr/objectives.hpp"
#include "gesmr/rng.hpp"
#include "gesmr/stats.hpp"

namespace gesmr {

/// Where the base points x come from.
struct XSource {
    enum class Kind { fixed_point, standard_normal, scaled_normal };
    Kind kind = Kind::standard_normal;
    Vector point;       // fixed_point
    double scale = 1.0; // scaled_normal

    static XSource fixed(Vector p) { return {Kind::fixed_point, std::move(p), 1.0}; }
    static XSource standard_normal() { return {}; }
    static XSource scaled_normal(double s) { return {Kind::scaled_normal, {}, s}; }
};

struct DeltaHistogram {
    Vector sigma_grid;
    Vector bin_edges;                                  // bins + 1 ascending edges
    std::vector<std::vector<std::uint64_t>> counts;    // [sigma][bin]
    Vector mean_curve;                                 // E[delta]
    Vector min_curve;                                  // E[min_q delta_q]
    Vector max_curve;                                  // E[max_q delta_q]
    std::size_t q = 1;
    std::size_t samples = 0;
};

struct DeltaSamplingOptions {
    std::size_t bins = 64;
    std::size_t workers = 1;
};

/// Draws `samples` delta values per sigma.
///
/// Draws come in mirrored pairs (x, +eps) and (x, -eps); the same base draws
/// are reused at every sigma. Each delta is marginally distributed as
/// delta(x, sigma), the sample mean has no first-order noise term, and curves
/// are smooth across the grid. Best/worst-of-q expectations average the
/// extremes of disjoint consecutive blocks of q over the "+" draws followed
/// by the "-" draws; within a block all draws come from distinct base pairs
/// except possibly where the two halves meet.
inline DeltaHistogram sample_delta(const Objective& obj, const XSource& source, const Vector& sigma_grid,
                                   std::size_t samples, std::size_t q, const RngStream& rng,
                                   const DeltaSamplingOptions& options = {}) {
    if (q < 1 || samples < q) throw std::invalid_argument("delta sampling needs samples >= q >= 1");
    if (sigma_grid.empty()) throw std::invalid_argument("delta sampling needs a sigma grid");
    for (double s : sigma_grid)
        if (!(s >= 0.0)) throw std::invalid_argument("sigma grid values must be nonnegative");
    if (source.kind == XSource::Kind::fixed_point && source.point.size() != obj.dim())
        throw std::invalid_argument("fixed point does not match objective dimension");
    if (options.bins == 0) throw std::invalid_argument("histogram needs at least one bin");

    const std::size_t d = obj.dim();
    const std::size_t pairs = samples / 2;
    const std::size_t base = pairs + samples % 2;  // "+" draws
    std::vector<Vector> xs(base, Vector(d));
    std::vector<Vector> eps(base, Vector(d));
    Vector f0(base);
    parallel_for(0, base, options.workers, [&](std::size_t j) {
        auto engine = rng.engine(Purpose::analysis, 0, j);
        std::normal_distribution<double> normal(0.0, 1.0);
        switch (source.kind) {
            case XSource::Kind::fixed_point: xs[j] = source.point; break;
            case XSource::Kind::standard_normal:
                for (auto& v : xs[j]) v = normal(engine);
                break;
            case XSource::Kind::scaled_normal:
                for (auto& v : xs[j]) v = source.scale * normal(engine);
                break;
        }
        for (auto& v : eps[j]) v = normal(engine);
        f0[j] = obj.evaluate(xs[j]);
    });

    const std::size_t k = sigma_grid.size();
    std::vector<Vector> rows(k, Vector(samples));
    parallel_for(0, k, options.workers, [&](std::size_t s) {
        const double sigma = sigma_grid[s];
        Vector y(d);
        for (std::size_t j = 0; j < base; ++j) {
            for (std::size_t i = 0; i < d; ++i) y[i] = xs[j][i] + sigma * eps[j][i];
            rows[s][j] = obj.evaluate(y) - f0[j];
        }
        for (std::size_t j = 0; j < pairs; ++j) {
            for (std::size_t i = 0; i < d; ++i) y[i] = xs[j][i] - sigma * eps[j][i];
            rows[s][base + j] = obj.evaluate(y) - f0[j];
        }
    });

    DeltaHistogram h;
    h.sigma_grid = sigma_grid;
    h.q = q;
    h.samples = samples;
    h.mean_curve.resize(k);
    h.min_curve.resize(k);
    h.max_curve.resize(k);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const std::size_t blocks = samples / q;
    for (std::size_t s = 0; s < k; ++s) {
        const auto& r = rows[s];
        h.mean_curve[s] = mean(r);
        double smin = 0.0, smax = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto first = r.begin() + static_cast<std::ptrdiff_t>(b * q);
            const auto [mn, mx] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(q));
            smin += *mn;
            smax += *mx;
        }
        h.min_curve[s] = smin / static_cast<double>(blocks);
        h.max_curve[s] = smax / static_cast<double>(blocks);
        const auto [mn, mx] = std::minmax_element(r.begin(), r.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const std::size_t nb = options.bins;
    h.bin_edges.resize(nb + 1);
    for (std::size_t b = 0; b <= nb; ++b)
        h.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb);
    h.bin_edges.back() = hi;
    h.counts.assign(k, std::vector<std::uint64_t>(nb, 0));
    const double width = (hi - lo) / static_cast<double>(nb);
    for (std::size_t s = 0; s < k; ++s) {
        for (double v : rows[s]) {
            auto b = static_cast<std::size_t>((v - lo) / width);
            h.counts[s][std::min(b, nb - 1)] += 1;
        }
    }
    return h;
}

struct MrObjectiveCurves {
    Vector sigma_grid;
    Vector mean_curve;
    Vector outlier_curve;
    std::size_t mean_argmin = 0;
    std::size_t outlier_argmin = 0;
    double sigma_star_mean = 0.0;
    double sigma_star_min = 0.0;
};

/// Grid argmins of the mean and best-of-q curves; the smallest sigma wins ties.
inline MrObjectiveCurves mr_objective_curves(const DeltaHistogram& h) {
    if (h.sigma_grid.empty() || h.mean_curve.size() != h.sigma_grid.size() ||
        h.min_curve.size() != h.sigma_grid.size())
        throw std::invalid_argument("delta histogram is not populated");
    MrObjectiveCurves c;
    c.sigma_grid = h.sigma_grid;
    c.mean_curve = h.mean_curve;
    c.outlier_curve = h.min_curve;
    c.mean_argmin = argmin_first(c.mean_curve);
    c.outlier_argmin = argmin_first(c.outlier_curve);
    c.sigma_star_mean = c.sigma_grid[c.mean_argmin];
    c.sigma_star_min = c.sigma_grid[c.outlier_argmin];
    return c;
}

/// Monte-Carlo estimate of E[min of q iid N(0, sigma^2)] from `samples` minima.
inline double min_normal_expectation(std::size_t q, double sigma, std::size_t samples, const RngStream& rng,
                                     std::size_t workers = 1) {
    if (q < 1) throw std::invalid_argument("q must be >= 1");
    if (samples == 0) throw std::invalid_argument("samples must be >= 1");
    constexpr std::size_t chunk = 1 << 16;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    Vector sums(chunks, 0.0);
    parallel_for(0, chunks, workers, [&](std::size_t c) {
        auto engine = rng.engine(Purpose::analysis, 1, c);
        std::normal_distribution<double> normal(0.0, sigma);
        const std::size_t end = std::min(samples, (c + 1) * chunk);
        double s = 0.0;
        for (std::size_t j = c * chunk; j < end; ++j) {
            double m = normal(engine);
            for (std::size_t i = 1; i < q; ++i) m = std::min(m, normal(engine));
            s += m;
        }
        sums[c] = s;
    });
    double total = 0.0;
    for (double s : sums) total += s;
    return total / static_cast<double>(samples);
}

/// Mean over t of (log10 a(t) - log10 b(t))^2.
inline double log_mr_mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("log-MR curves differ in length");
    if (a.empty()) throw std::invalid_argument("log-MR curves are empty");
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (!(a[t] > 0.0) || !(b[t] > 0.0)) throw std::invalid_argument("log-MR curves must be strictly positive");
        const double e = std::log10(a[t]) - std::log10(b[t]);
        s += e * e;
    }
    return s / static_cast<double>(a.size());
}

inline std::vector<std::size_t> divisors(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= n; ++k)
        if (n % k == 0) out.push_back(k);
    return out;
}

/// Divisor of n closest to target; the smaller divisor wins ties.
inline std::size_t nearest_divisor(std::size_t n, double target) {
    std::size_t best = 1;
    for (auto k : divisors(n))
        if (std::abs(static_cast<double>(k) - target) < std::abs(static_cast<double>(best) - target)) best = k;
    return best;
}

/// round(sqrt(N)) snapped to the nearest divisor of N.
inline std::size_t default_groups(std::size_t n) {
    return nearest_divisor(n, std::round(std::sqrt(static_cast<double>(n))));
}

struct AblationRow {
    std::size_t population_size = 0;
    std::size_t groups = 0;
    double median_final_elite = 0.0;
    Vector final_elite;  // per seed
};

/// GESMR over every divisor K of each N. `base` supplies everything except
/// N, K and the seed.
inline std::vector<AblationRow> group_size_ablation(const Objective& obj, const std::vector<std::size_t>& ns,
                                                    const EvolutionParams& base, const GesmrParams& gesmr,
                                                    const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("group-size ablation needs at least one seed");
    struct Leg {
        std::size_t row, n, k, seed;
    };
    std::vector<AblationRow> rows;
    std::vector<Leg> legs;
    for (auto n : ns) {
        const auto ks = divisors(n);
        if (ks.size() < 3) throw ConfigError("N=" + std::to_string(n) + " has fewer than three divisors");
        for (auto k : ks) {
            for (std::size_t s = 0; s < seeds.size(); ++s) legs.push_back({rows.size(), n, k, s});
            rows.push_back({n, k, 0.0, Vector(seeds.size())});
        }
    }
    parallel_for(0, legs.size(), base.workers, [&](std::size_t i) {
        const auto& leg = legs[i];
        EvolutionParams p = base;
        p.population_size = leg.n;
        p.seed = seeds[leg.seed];
        p.workers = 1;
        GesmrParams g = gesmr;
        g.groups = leg.k;
        GesmrController c(g, leg.n);
        rows[leg.row].final_elite[leg.seed] = evolve(obj, p, c).back().elite_f;
    });
    for (auto& r : rows) r.median_final_elite = median(r.final_elite);
    return rows;
}

} // namespace gesmr
