// Runs GESMR, SAMR and a fixed MR on Ackley and prints the elite every 50 generations.

#include <cstdio>

#include "gesmr/gesmr.hpp"

int main() {
    using namespace gesmr;
    const Objective obj(ObjectiveKind::ackley, 20);
    EvolutionParams p;
    p.population_size = 64;
    p.generations = 300;
    p.seed = 1;

    GesmrParams gp;
    gp.groups = 8;
    GesmrController gesmr(gp, p.population_size);
    SamrController samr(p.population_size, 2.0);
    FixedRateController fixed(0.01);

    const auto a = evolve(obj, p, gesmr);
    const auto b = evolve(obj, p, samr);
    const auto c = evolve(obj, p, fixed);

    std::printf("%6s %14s %14s %14s   %s\n", "gen", "gesmr", "samr", "fmr(0.01)", "gesmr mean log10 MR");
    for (std::size_t t = 0; t < a.size(); t += 50)
        std::printf("%6zu %14.6g %14.6g %14.6g   %.3f\n", t, a[t].elite_f, b[t].elite_f, c[t].elite_f,
                    a[t].mean_log10_mr);
    return 0;
}
