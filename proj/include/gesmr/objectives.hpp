#pragma once

/// @file objectives.hpp
/// @brief Test functions and the small MLP regression task, all minimized.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gesmr/errors.hpp"
#include "gesmr/rng.hpp"

namespace gesmr {

enum class ObjectiveKind { sphere, ackley, griewank, rastrigin, rosenbrock, linear, mlp_task };

namespace functions {

inline double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// a = 20, b = 0.2, c = 2π.
inline double ackley(std::span<const double> x) {
    const double d = static_cast<double>(x.size());
    double sq = 0.0;
    double cs = 0.0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(2.0 * std::numbers::pi * v);
    }
    const double value = -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 +
                         std::numbers::e;
    // exp(1) and 20 - 20 do not cancel exactly at the origin
    return value < 1e-15 ? 0.0 : value;
}

inline double griewank(std::span<const double> x) {
    double s = 0.0;
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * x[i] / 4000.0;
        p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
    }
    return 1.0 + s - p;
}

inline double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return s;
}

inline double rosenbrock(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        s += 100.0 * a * a + b * b;
    }
    return s;
}

/// Unbounded below; larger steps are always better in expectation of the best child.
inline double linear(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

} // namespace functions

/// Fully connected tanh network regressed with mean squared error.
///
/// Parameters are laid out layer by layer: the row-major weight matrix
/// (outputs x inputs) first, then the bias vector. Hidden layers use tanh,
/// the output layer is linear.
class MlpTaskSpec {
public:
    struct Sample {
        Vector input;
        Vector target;
    };

    MlpTaskSpec(std::vector<std::size_t> layer_sizes, std::vector<Sample> dataset)
        : layers_(std::move(layer_sizes)), data_(std::move(dataset)) {
        if (layers_.size() < 2) throw std::invalid_argument("mlp needs at least input and output layers");
        for (auto n : layers_)
            if (n == 0) throw std::invalid_argument("mlp layer sizes must be positive");
        for (const auto& s : data_) {
            if (s.input.size() != layers_.front() || s.target.size() != layers_.back())
                throw std::invalid_argument("mlp dataset sample does not match layer sizes");
        }
        if (data_.empty()) throw std::invalid_argument("mlp dataset is empty");
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) params_ += layers_[l + 1] * (layers_[l] + 1);
        widest_ = 0;
        for (auto n : layers_) widest_ = std::max(widest_, n);
    }

    [[nodiscard]] const std::vector<std::size_t>& layer_sizes() const noexcept { return layers_; }
    [[nodiscard]] const std::vector<Sample>& dataset() const noexcept { return data_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return params_; }

    /// Mean over samples and output units of the squared error.
    [[nodiscard]] double evaluate(std::span<const double> params) const {
        if (params.size() != params_)
            throw std::invalid_argument("mlp parameter vector has length " + std::to_string(params.size()) +
                                        ", expected " + std::to_string(params_));
        Vector a(widest_);
        Vector b(widest_);
        double total = 0.0;
        for (const auto& s : data_) {
            std::copy(s.input.begin(), s.input.end(), a.begin());
            std::size_t off = 0;
            for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
                const std::size_t in = layers_[l];
                const std::size_t out = layers_[l + 1];
                const double* w = params.data() + off;
                const double* bias = w + out * in;
                const bool hidden = l + 2 < layers_.size();
                for (std::size_t o = 0; o < out; ++o) {
                    double z = bias[o];
                    for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * a[i];
                    b[o] = hidden ? std::tanh(z) : z;
                }
                off += out * (in + 1);
                std::swap(a, b);
            }
            for (std::size_t o = 0; o < layers_.back(); ++o) {
                const double e = a[o] - s.target[o];
                total += e * e;
            }
        }
        return total / static_cast<double>(data_.size() * layers_.back());
    }

private:
    std::vector<std::size_t> layers_;
    std::vector<Sample> data_;
    std::size_t params_ = 0;
    std::size_t widest_ = 0;
};

inline double mlp_evaluate(const MlpTaskSpec& spec, std::span<const double> params) {
    return spec.evaluate(params);
}

/// Default desk-scale regression task: 64 points in two Gaussian clusters
/// around (-1,-1) and (1,1), target sin(1.5 x0) cos(1.5 x1) + cluster offset
/// plus small noise. Deterministic in @p seed.
inline MlpTaskSpec make_default_mlp_task(std::uint64_t seed, std::vector<std::size_t> layers = {2, 8, 1},
                                         std::size_t points = 64) {
    if (layers.empty() || layers.front() != 2 || layers.back() != 1)
        throw std::invalid_argument("default mlp task needs 2 inputs and 1 output");
    auto engine = RngStream(seed).engine(Purpose::task, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<MlpTaskSpec::Sample> data;
    data.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double centre = (i % 2 == 0) ? -1.0 : 1.0;
        const double x0 = centre + 0.5 * normal(engine);
        const double x1 = centre + 0.5 * normal(engine);
        const double y = std::sin(1.5 * x0) * std::cos(1.5 * x1) + 0.5 * centre + 0.05 * normal(engine);
        data.push_back({{x0, x1}, {y}});
    }
    return MlpTaskSpec(std::move(layers), std::move(data));
}

/// Named evaluation function over R^d. Immutable and safe to share across threads.
class Objective {
public:
    Objective(ObjectiveKind kind, std::size_t dim) : kind_(kind), dim_(dim) {
        if (dim_ == 0) throw std::invalid_argument("objective dimension must be >= 1");
        if (kind_ == ObjectiveKind::mlp_task)
            throw std::invalid_argument("mlp_task objectives are built from an MlpTaskSpec");
    }

    explicit Objective(MlpTaskSpec spec)
        : kind_(ObjectiveKind::mlp_task),
          dim_(spec.parameter_count()),
          mlp_(std::make_shared<const MlpTaskSpec>(std::move(spec))) {}

    [[nodiscard]] ObjectiveKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::string name() const;
    [[nodiscard]] const MlpTaskSpec* mlp() const noexcept { return mlp_.get(); }

    [[nodiscard]] double evaluate(std::span<const double> x) const {
        if (x.size() != dim_)
            throw std::invalid_argument("objective " + name() + " expects dimension " + std::to_string(dim_) +
                                        ", got " + std::to_string(x.size()));
        switch (kind_) {
            case ObjectiveKind::sphere: return functions::sphere(x);
            case ObjectiveKind::ackley: return functions::ackley(x);
            case ObjectiveKind::griewank: return functions::griewank(x);
            case ObjectiveKind::rastrigin: return functions::rastrigin(x);
            case ObjectiveKind::rosenbrock: return functions::rosenbrock(x);
            case ObjectiveKind::linear: return functions::linear(x);
            case ObjectiveKind::mlp_task: return mlp_->evaluate(x);
        }
        throw InternalError("unhandled objective kind");
    }

    double operator()(std::span<const double> x) const { return evaluate(x); }

private:
    ObjectiveKind kind_;
    std::size_t dim_;
    std::shared_ptr<const MlpTaskSpec> mlp_;
};

inline double evaluate(const Objective& obj, std::span<const double> x) { return obj.evaluate(x); }

inline std::string_view to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::sphere: return "sphere";
        case ObjectiveKind::ackley: return "ackley";
        case ObjectiveKind::griewank: return "griewank";
        case ObjectiveKind::rastrigin: return "rastrigin";
        case ObjectiveKind::rosenbrock: return "rosenbrock";
        case ObjectiveKind::linear: return "linear";
        case ObjectiveKind::mlp_task: return "mlp_task";
    }
    return "unknown";
}

inline std::string Objective::name() const { return std::string(to_string(kind_)); }

inline ObjectiveKind parse_objective_kind(std::string_view name) {
    for (auto k : {ObjectiveKind::sphere, ObjectiveKind::ackley, ObjectiveKind::griewank, ObjectiveKind::rastrigin,
                   ObjectiveKind::rosenbrock, ObjectiveKind::linear, ObjectiveKind::mlp_task}) {
        if (to_string(k) == name) return k;
    }
    if (name == "mlp") return ObjectiveKind::mlp_task;
    throw ConfigError("unknown objective '" + std::string(name) +
                      "' (expected sphere, ackley, griewank, rastrigin, rosenbrock, linear or mlp_task)");
}

/// Builds an objective by name. For mlp_task the dataset is generated from
/// @p seed and @p dim must equal the parameter count of @p mlp_layers.
inline Objective make_objective(std::string_view name, std::size_t dim, std::uint64_t seed = 0,
                                const std::vector<std::size_t>& mlp_layers = {2, 8, 1}) {
    const auto kind = parse_objective_kind(name);
    if (kind != ObjectiveKind::mlp_task) return Objective(kind, dim);
    auto spec = make_default_mlp_task(seed, mlp_layers);
    if (dim != spec.parameter_count())
        throw ConfigError("mlp_task with layers of this shape has " + std::to_string(spec.parameter_count()) +
                          " parameters, but dim is " + std::to_string(dim));
    return Objective(std::move(spec));
}

} // namespace gesmr
