#pragma once

/// @file rng.hpp
/// @brief Seeded, order-independent random streams.
///
/// Every random draw in a run comes from an engine derived from
/// (master seed, purpose, generation, index). Two runs with the same seed
/// therefore produce identical numbers no matter how work is scheduled.

#include <cstdint>
#include <random>

namespace gesmr {

enum class Purpose : std::uint64_t {
    init = 1,
    selection = 2,
    mutation = 3,
    controller = 4,
    lookahead = 5,
    analysis = 6,
    task = 7,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    using Engine = std::mt19937_64;

    constexpr explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] constexpr std::uint64_t key(Purpose purpose, std::uint64_t generation,
                                              std::uint64_t index) const noexcept {
        std::uint64_t h = mix64(seed_);
        h = mix64(h ^ static_cast<std::uint64_t>(purpose));
        h = mix64(h ^ generation);
        return mix64(h ^ (index * 0xd6e8feb86659fd93ULL));
    }

    /// Independent engine for one (purpose, generation, index) cell.
    [[nodiscard]] Engine engine(Purpose purpose, std::uint64_t generation,
                                std::uint64_t index = 0) const {
        return Engine{key(purpose, generation, index)};
    }

    /// A child stream with its own seed, e.g. for a look-ahead leg or a repeat.
    [[nodiscard]] constexpr RngStream child(Purpose purpose, std::uint64_t a,
                                            std::uint64_t b = 0) const noexcept {
        return RngStream{key(purpose, a, b)};
    }

private:
    std::uint64_t seed_;
};

/// Uniform draw on the open interval (-1, 1).
template <class Engine>
double uniform_open_pm1(Engine& engine) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double e = dist(engine);
    while (e == -1.0) e = dist(engine);
    return e;
}

} // namespace gesmr
