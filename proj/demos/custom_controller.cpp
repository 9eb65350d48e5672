// Plugging a user-defined controller into the engine: a rate that decays
// geometrically, driven on the shipped MLP task.

#include <cmath>
#include <cstdio>

#include "gesmr/gesmr.hpp"

namespace {

class DecayingRate {
public:
    DecayingRate(double start, double factor) : sigma_(start), factor_(factor) {}

    gesmr::Vector propose(const gesmr::SelectionInfo& info) { return gesmr::Vector(info.offspring, sigma_); }
    void observe(const gesmr::SelectionInfo&, std::span<const double>) { sigma_ *= factor_; }
    [[nodiscard]] gesmr::Vector rates() const { return {sigma_}; }

private:
    double sigma_;
    double factor_;
};

static_assert(gesmr::MutationRateController<DecayingRate>);

} // namespace

int main() {
    using namespace gesmr;
    const Objective task(make_default_mlp_task(3));
    EvolutionParams p;
    p.population_size = 64;
    p.generations = 400;
    p.seed = 3;

    DecayingRate decay(0.5, 0.99);
    GesmrController gesmr(GesmrParams{}, p.population_size);
    const auto a = evolve(task, p, decay);
    const auto b = evolve(task, p, gesmr);
    std::printf("parameters %zu\n", task.dim());
    std::printf("decaying MR final loss %.6g\n", a.back().elite_f);
    std::printf("GESMR       final loss %.6g (final MR %.3g)\n", b.back().elite_f,
                std::pow(10.0, b.back().mean_log10_mr));
    return 0;
}
