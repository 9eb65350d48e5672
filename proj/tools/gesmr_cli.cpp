// Command-line front end: thin wrappers over the library operations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gesmr/gesmr.hpp"

namespace fs = std::filesystem;
using namespace gesmr;

namespace {

struct Common {
    std::size_t workers = 0;  // 0: take GESMR_WORKERS

    [[nodiscard]] std::size_t resolved() const { return workers > 0 ? workers : workers_from_env(); }
};

struct GridFlags {
    double lo = 1e-4;
    double hi = 1e2;
    std::size_t n = 9;

    void attach(CLI::App* app) {
        app->add_option("--grid-lo", lo, "smallest grid MR")->capture_default_str();
        app->add_option("--grid-hi", hi, "largest grid MR")->capture_default_str();
        app->add_option("--grid-n", n, "number of log-spaced grid points")->capture_default_str();
    }
    [[nodiscard]] MrGrid grid() const {
        if (n == 0 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("grid needs 0 < grid-lo <= grid-hi and grid-n >= 1");
        return MrGrid::log_range(lo, hi, n);
    }
};

void print_written(const RunOutput& out) {
    for (const auto& f : out.trace_files) std::cout << "wrote " << f.string() << '\n';
    std::cout << "wrote " << out.manifest.string() << '\n';
}

int cmd_run(const std::string& config, const fs::path& out, const Common& common) {
    const RunConfig c = load_config(config);
    print_written(run(c, out, common.resolved()));
    return 0;
}

int cmd_compare(const std::vector<std::string>& runs, const std::vector<std::string>& refs, const std::string& out) {
    std::vector<AlgorithmRuns> r, ref;
    for (const auto& d : runs) r.push_back(load_run(d));
    for (const auto& d : refs) ref.push_back(load_run(d));
    const auto report = compare(r, ref);
    const std::string csv = report_csv(report);
    std::cout << csv;
    if (!out.empty()) {
        fs::create_directories(out);
        write_text(fs::path(out) / "report.csv", csv);
        write_text(fs::path(out) / "report.json", report_json(report).dump(2) + "\n");
    }
    return 0;
}

int cmd_ofmr(const std::string& config, const fs::path& out, const GridFlags& g, const Common& common) {
    const auto [result, written] = run_ofmr(load_config(config), g.grid(), out, common.resolved());
    std::cout << "sigma,median_final_elite\n";
    for (std::size_t j = 0; j < result.median_final_elite.size(); ++j)
        std::cout << format_real(g.grid().values[j]) << ',' << format_real(result.median_final_elite[j]) << '\n';
    std::cout << "selected sigma " << format_real(result.best_sigma) << '\n';
    print_written(written);
    return 0;
}

int cmd_lamr(const std::string& config, const fs::path& out, std::size_t period, std::size_t repeats,
             const GridFlags& g, const Common& common) {
    if (period == 0 || repeats == 0) throw ConfigError("period and repeats must be positive");
    LookaheadPlan plan;
    plan.period = period;
    plan.repeats_per_sigma = repeats;
    plan.grid = g.grid();
    print_written(run_lamr(load_config(config), plan, out, common.resolved()));
    return 0;
}

struct DeltaFlags {
    std::string objective = "ackley";
    std::size_t dim = 2;
    std::string source = "normal";
    double scale = 1.0;
    std::vector<double> point;
    double sigma_lo = 1e-4;
    double sigma_hi = 1e2;
    std::size_t sigma_n = 33;
    std::size_t samples = 20000;
    std::size_t q = 16;
    std::size_t bins = 64;
    std::uint64_t seed = 0;
    std::string out = "delta_curves";
};

int cmd_delta(const DeltaFlags& f, const Common& common) {
    if (f.sigma_n == 0 || !(f.sigma_lo > 0.0) || !(f.sigma_hi >= f.sigma_lo))
        throw ConfigError("sigma grid needs 0 < sigma-lo <= sigma-hi and sigma-n >= 1");
    const Objective obj = make_objective(f.objective, f.dim, f.seed);
    XSource src;
    if (f.source == "normal") src = XSource::standard_normal();
    else if (f.source == "scaled") src = XSource::scaled_normal(f.scale);
    else if (f.source == "fixed") {
        if (f.point.size() != f.dim) throw ConfigError("--point needs exactly dim values");
        src = XSource::fixed(f.point);
    } else
        throw ConfigError("unknown source '" + f.source + "' (expected normal, scaled or fixed)");
    if (f.q < 1 || f.samples < f.q) throw ConfigError("need samples >= q >= 1");
    if (f.bins == 0) throw ConfigError("bins must be positive");

    const auto h = sample_delta(obj, src, log_spaced(f.sigma_lo, f.sigma_hi, f.sigma_n), f.samples, f.q,
                                RngStream(f.seed), {.bins = f.bins, .workers = common.resolved()});
    const auto curves = mr_objective_curves(h);
    fs::create_directories(f.out);
    std::ofstream hist(fs::path(f.out) / "histogram.csv");
    hist << "sigma,bin_lo,bin_hi,count\n";
    for (std::size_t s = 0; s < h.sigma_grid.size(); ++s)
        for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b)
            hist << format_real(h.sigma_grid[s]) << ',' << format_real(h.bin_edges[b]) << ','
                 << format_real(h.bin_edges[b + 1]) << ',' << h.counts[s][b] << '\n';
    std::ofstream cv(fs::path(f.out) / "curves.csv");
    cv << "sigma,mean,min_q,max_q\n";
    for (std::size_t s = 0; s < h.sigma_grid.size(); ++s)
        cv << format_real(h.sigma_grid[s]) << ',' << format_real(h.mean_curve[s]) << ','
           << format_real(h.min_curve[s]) << ',' << format_real(h.max_curve[s]) << '\n';
    std::cout << "sigma*_mean " << format_real(curves.sigma_star_mean) << '\n'
              << "sigma*_min " << format_real(curves.sigma_star_min) << " (E[min_q] = "
              << format_real(curves.outlier_curve[curves.outlier_argmin]) << ")\n"
              << "wrote " << (fs::path(f.out) / "histogram.csv").string() << '\n'
              << "wrote " << (fs::path(f.out) / "curves.csv").string() << '\n';
    return 0;
}

int cmd_theorem(std::size_t q, std::size_t samples, const std::vector<double>& sigmas, std::uint64_t seed,
                double band, const Common& common) {
    if (q < 1 || samples == 0) throw ConfigError("need q >= 1 and samples >= 1");
    if (sigmas.empty()) throw ConfigError("need at least one sigma");
    for (double s : sigmas)
        if (!(s > 0.0)) throw ConfigError("sigmas must be positive");
    const RngStream rng(seed);
    std::cout << "q=" << q << " samples=" << samples << '\n' << "sigma,estimate,normalized\n";
    Vector normalized;
    bool negative = true;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double e = min_normal_expectation(q, sigmas[i], samples, rng.child(Purpose::analysis, 2, i),
                                                common.resolved());
        normalized.push_back(e / sigmas[i]);
        negative = negative && e < 0.0;
        std::cout << format_real(sigmas[i]) << ',' << format_real(e) << ',' << format_real(normalized.back()) << '\n';
    }
    const auto [lo, hi] = std::minmax_element(normalized.begin(), normalized.end());
    const double spread = (*hi - *lo) / std::abs(mean(normalized));
    const bool sign_ok = q < 2 || negative;
    const bool pass = spread <= band && sign_ok;
    std::cout << "relative spread " << format_real(spread) << " (band " << format_real(band) << ")"
              << (q >= 2 ? (negative ? ", all negative" : ", NOT all negative") : "") << '\n'
              << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 1;
}

int cmd_ablate(const std::string& objective, std::size_t dim, const std::vector<std::size_t>& ns,
               std::size_t generations, const std::vector<std::uint64_t>& seeds, double init_std,
               const Common& common) {
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
    const Objective obj = make_objective(objective, dim, seeds.front());
    EvolutionParams base;
    base.generations = generations;
    base.init_std = init_std;
    base.workers = common.resolved();
    const auto rows = group_size_ablation(obj, ns, base, GesmrParams{}, seeds);
    std::cout << "N,K,median_final_elite\n";
    for (const auto& r : rows)
        std::cout << r.population_size << ',' << r.groups << ',' << format_real(r.median_final_elite) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GESMR mutation-rate control experiments"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--workers", common.workers, "worker threads (default: GESMR_WORKERS or 1)");

    std::string config;
    std::string out;

    auto* run_cmd = app.add_subcommand("run", "run a config for every seed and write traces");
    run_cmd->add_option("--config", config, "JSON run config")->required();
    run_cmd->add_option("--out", out, "output directory")->required();

    std::vector<std::string> runs, refs;
    std::string report_dir;
    auto* cmp = app.add_subcommand("compare", "final/mean elite and log-MR error report");
    cmp->add_option("--run", runs, "run directories")->required();
    cmp->add_option("--reference", refs, "reference (oracle) run directories");
    cmp->add_option("--out", report_dir, "directory for report.csv and report.json");

    GridFlags grid;
    auto* ofmr_cmd = app.add_subcommand("ofmr", "offline grid search for the best fixed MR");
    ofmr_cmd->add_option("--config", config, "JSON run config")->required();
    ofmr_cmd->add_option("--out", out, "output directory")->required();
    grid.attach(ofmr_cmd);

    std::size_t period = 50, repeats = 3;
    auto* lamr_cmd = app.add_subcommand("lamr", "look-ahead oracle reference run");
    lamr_cmd->add_option("--config", config, "JSON run config")->required();
    lamr_cmd->add_option("--out", out, "output directory")->required();
    lamr_cmd->add_option("--period,-G", period, "look-ahead horizon G")->capture_default_str();
    lamr_cmd->add_option("--repeats", repeats, "repeats per grid MR")->capture_default_str();
    grid.attach(lamr_cmd);

    DeltaFlags delta;
    auto* dc = app.add_subcommand("delta-curves", "sample mutation deltas and MR objective curves");
    dc->add_option("--objective", delta.objective)->capture_default_str();
    dc->add_option("--dim", delta.dim)->capture_default_str();
    dc->add_option("--source", delta.source, "normal, scaled or fixed")->capture_default_str();
    dc->add_option("--scale", delta.scale, "std of the scaled source")->capture_default_str();
    dc->add_option("--point", delta.point, "coordinates of the fixed source");
    dc->add_option("--sigma-lo", delta.sigma_lo)->capture_default_str();
    dc->add_option("--sigma-hi", delta.sigma_hi)->capture_default_str();
    dc->add_option("--sigma-n", delta.sigma_n)->capture_default_str();
    dc->add_option("--samples", delta.samples)->capture_default_str();
    dc->add_option("--q", delta.q, "block size for best/worst-of-q")->capture_default_str();
    dc->add_option("--bins", delta.bins)->capture_default_str();
    dc->add_option("--seed", delta.seed)->capture_default_str();
    dc->add_option("--out", delta.out, "output directory")->capture_default_str();

    std::size_t tq = 10, tsamples = 1000000;
    std::vector<double> tsigmas = {0.5, 1.0, 2.0, 4.0};
    std::uint64_t tseed = 0;
    double band = 0.02;
    auto* th = app.add_subcommand("theorem-check", "check E[min of q normals] scales linearly in sigma");
    th->add_option("--q", tq)->capture_default_str();
    th->add_option("--samples", tsamples)->capture_default_str();
    th->add_option("--sigmas", tsigmas)->capture_default_str();
    th->add_option("--seed", tseed)->capture_default_str();
    th->add_option("--band", band, "allowed relative spread")->capture_default_str();

    std::string aobj = "ackley";
    std::size_t adim = 100, agens = 500;
    std::vector<std::size_t> ans = {64};
    std::vector<std::uint64_t> aseeds = {0, 1, 2, 3, 4};
    double astd = 1.0;
    auto* ab = app.add_subcommand("ablate-groups", "GESMR over every divisor K of N");
    ab->add_option("--objective", aobj)->capture_default_str();
    ab->add_option("--dim", adim)->capture_default_str();
    ab->add_option("--n", ans, "population sizes")->capture_default_str();
    ab->add_option("--generations", agens)->capture_default_str();
    ab->add_option("--seeds", aseeds)->capture_default_str();
    ab->add_option("--init-std", astd)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(config, out, common);
        if (*cmp) return cmd_compare(runs, refs, report_dir);
        if (*ofmr_cmd) return cmd_ofmr(config, out, grid, common);
        if (*lamr_cmd) return cmd_lamr(config, out, period, repeats, grid, common);
        if (*dc) return cmd_delta(delta, common);
        if (*th) return cmd_theorem(tq, tsamples, tsigmas, tseed, band, common);
        if (*ab) return cmd_ablate(aobj, adim, ans, agens, aseeds, astd, common);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
