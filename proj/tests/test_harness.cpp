#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "gesmr/harness.hpp"

using namespace gesmr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gesmr_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config(const std::string& algorithm) {
    RunConfig c;
    c.objective = {"sphere", 10, {2, 8, 1}};
    c.algorithm.name = algorithm;
    c.population_size = 16;
    c.generations = 30;
    c.seeds = {1, 2};
    return c;
}

} // namespace

TEST(Config, JsonRoundTrip) {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        RunConfig c;
        const auto& names = controller_names();
        c.algorithm.name = names[rng() % names.size()];
        c.objective.name = std::vector<std::string>{"sphere", "ackley", "rastrigin", "griewank", "linear"}[rng() % 5];
        c.objective.dim = 1 + rng() % 50;
        c.population_size = 4 * (1 + rng() % 20);
        c.generations = rng() % 500;
        c.init_std = 0.5 + static_cast<double>(rng() % 100) / 7.0;
        c.solution_selection_rate = 0.25 + static_cast<double>(rng() % 4) / 8.0;
        c.seeds = {rng() % 1000, rng() % 1000};
        if (rng() % 2) c.algorithm.groups = 4;
        if (rng() % 2) c.algorithm.sigma = 0.1 / static_cast<double>(1 + rng() % 9);
        c.algorithm.meta_mr = 1.0 + static_cast<double>(rng() % 17) / 3.0;
        EXPECT_EQ(parse_config(serialize(c)), c);
        const RunConfig r = resolve(c);
        EXPECT_EQ(parse_config(serialize(r)), r);
    }
}

TEST(Config, UnknownNamesRejected) {
    auto c = small_config("gesmr");
    c.algorithm.name = "cmaes";
    EXPECT_THROW(resolve(c), ConfigError);
    c = small_config("gesmr");
    c.objective.name = "banana";
    EXPECT_THROW(resolve(c), ConfigError);
    EXPECT_THROW(parse_config(R"({"population_size": 8, "colour": "red"})"), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/gesmr.json"), ConfigError);
}

TEST(Config, BadGroupCountNamesNearestDivisor) {
    auto c = small_config("gesmr");
    c.population_size = 64;
    c.algorithm.groups = 7;
    try {
        resolve(c);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("nearest valid K is 8"), std::string::npos) << e.what();
    }
}

TEST(Config, DefaultsFilled) {
    auto c = small_config("gesmr");
    c.population_size = 100;
    EXPECT_EQ(resolve(c).algorithm.groups, 10u);
    EXPECT_EQ(resolve(small_config("fmr")).algorithm.sigma, 0.01);
    EXPECT_FALSE(resolve(small_config("samr")).algorithm.groups.has_value());
}

TEST(Config, MlpDimensionChecked) {
    auto c = small_config("gesmr");
    c.objective.name = "mlp";
    c.objective.dim = 33;
    EXPECT_EQ(resolve(c).objective.name, "mlp_task");
    c.objective.dim = 32;
    EXPECT_THROW(resolve(c), ConfigError);
}

TEST(Run, ZeroGenerationsGivesInitialRecordOnly) {
    auto c = small_config("gesmr");
    c.generations = 0;
    const auto traces = run_traces(c);
    ASSERT_EQ(traces.size(), 2u);
    ASSERT_EQ(traces[0].size(), 1u);
    EXPECT_EQ(traces[0][0].generation, 0u);
    EXPECT_EQ(traces[0][0].cum_evals, 17u);
}

TEST(Run, EveryControllerRuns) {
    for (const auto& name : controller_names()) {
        const auto traces = run_traces(small_config(name));
        ASSERT_EQ(traces[0].size(), 31u) << name;
        EXPECT_LE(traces[0].back().elite_f, traces[0].front().elite_f) << name;
    }
}

TEST(Run, ByteIdenticalReruns) {
    const auto a = scratch("rerun_a");
    const auto b = scratch("rerun_b");
    const auto c = small_config("gesmr");
    const auto ra = run(c, a);
    const auto rb = run(c, b, 3);
    ASSERT_EQ(ra.trace_files.size(), 2u);
    for (std::size_t s = 0; s < 2; ++s)
        EXPECT_EQ(slurp(ra.trace_files[s]), slurp(rb.trace_files[s]));
    EXPECT_EQ(slurp(ra.manifest), slurp(rb.manifest));
    EXPECT_TRUE(fs::exists(a / "manifest.json"));
    EXPECT_TRUE(fs::exists(a / "trace_seed_1.csv"));
    const auto loaded = load_run(a);
    EXPECT_EQ(loaded.algorithm, "gesmr");
    EXPECT_EQ(loaded.seeds, (std::vector<std::uint64_t>{1, 2}));
    // per-group deltas live in memory only; the CSV carries the seven schema columns
    auto expected = ra.traces;
    for (auto& seed_traces : expected)
        for (auto& r : seed_traces) r.group_deltas.clear();
    EXPECT_EQ(loaded.traces, expected);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Run, OracleAlgorithmNeedsOracleCommand) {
    EXPECT_THROW(run(small_config("lamr"), scratch("oracle")), ConfigError);
}

TEST(Run, SphereGesmrImproves) {
    RunConfig c;
    c.objective = {"sphere", 10, {2, 8, 1}};
    c.algorithm.name = "gesmr";
    c.algorithm.groups = 10;
    c.population_size = 100;
    c.generations = 300;
    c.seeds = {1};
    const auto t = run_traces(c)[0];
    EXPECT_LT(t.back().elite_f, t.front().elite_f);
    EXPECT_LT(t.back().elite_f, 1e-3 * t.front().elite_f);
}

TEST(TraceIo, RoundTripAndSchema) {
    const auto traces = run_traces(small_config("samr"))[0];
    std::stringstream ss;
    write_trace_csv(ss, traces);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "generation,elite_f,mean_f,mean_log10_mr,min_mr,max_mr,cum_evals");
    ss.seekg(0);
    EXPECT_EQ(read_trace_csv(ss), traces);
}

TEST(TraceIo, MalformedRejected) {
    std::stringstream bad_header("gen,elite\n0,1\n");
    EXPECT_ANY_THROW(read_trace_csv(bad_header));
    std::stringstream gap(std::string(trace_header) + "\n0,1,1,0,1,1,5\n2,1,1,0,1,1,9\n");
    EXPECT_ANY_THROW(read_trace_csv(gap));
    std::stringstream short_row(std::string(trace_header) + "\n0,1,1,0,1\n");
    EXPECT_ANY_THROW(read_trace_csv(short_row));
}

TEST(Compare, SelfReferenceHasZeroError) {
    const auto dir = scratch("compare_self");
    run(small_config("gesmr"), dir);
    const auto r = load_run(dir);
    const auto report = compare({r}, {r});
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_EQ(report.rows[0].median_log_mr_mse, 0.0);
    EXPECT_FALSE(report.rows[0].oracle);
    fs::remove_all(dir);
}

TEST(Compare, FrozenPoolDiffersFromMovingReference) {
    auto c = small_config("gesmr-fix");
    AlgorithmRuns fix{"gesmr-fix", c.objective, false, c.seeds, run_traces(c)};
    c.algorithm.name = "15mr";
    AlgorithmRuns ref{"15mr", c.objective, false, c.seeds, run_traces(c)};
    const auto report = compare({fix}, {ref});
    EXPECT_GT(report.rows[0].median_log_mr_mse, 0.0);
    const auto csv = report_csv(report);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "algorithm,objective,dim,oracle,median_final_elite,median_mean_elite,median_log_mr_mse");
}

TEST(Compare, NoReferenceGivesNan) {
    auto c = small_config("fmr");
    AlgorithmRuns fmr{"fmr", c.objective, false, c.seeds, run_traces(c)};
    const auto report = compare({fmr}, {});
    EXPECT_TRUE(std::isnan(report.rows[0].median_log_mr_mse));
    EXPECT_NE(report_csv(report).find(",nan\n"), std::string::npos);
    EXPECT_FALSE(report_json(report)["rows"][0].contains("log_mr_mse"));
}

TEST(Compare, LamrRunIsFlaggedAsOracle) {
    const auto dir = scratch("compare_lamr");
    auto c = small_config("gesmr");
    c.generations = 20;
    LookaheadPlan plan;
    plan.period = 10;
    plan.repeats_per_sigma = 1;
    run_lamr(c, plan, dir);
    const auto r = load_run(dir);
    EXPECT_EQ(r.algorithm, "lamr");
    const auto report = compare({r}, {r});
    EXPECT_TRUE(report.rows[0].oracle);
    fs::remove_all(dir);
}

TEST(Compare, LengthMismatchThrows) {
    auto c = small_config("gesmr");
    AlgorithmRuns a{"gesmr", c.objective, false, c.seeds, run_traces(c)};
    c.generations = 10;
    AlgorithmRuns b{"fmr", c.objective, false, c.seeds, run_traces(c)};
    EXPECT_THROW(compare({a}, {b}), std::invalid_argument);
}

TEST(Ofmr, RunWritesSelectedTraces) {
    const auto dir = scratch("ofmr");
    auto c = small_config("fmr");
    c.objective = {"linear", 5, {2, 8, 1}};
    const auto [result, out] = run_ofmr(c, MrGrid::log_range(1e-2, 1e0, 3), dir);
    EXPECT_EQ(result.best_sigma, 1.0);
    EXPECT_EQ(out.trace_files.size(), 2u);
    EXPECT_TRUE(load_run(dir).oracle);
    c.objective = {"mlp_task", 33, {2, 8, 1}};
    EXPECT_THROW(run_ofmr(c, MrGrid(), dir), ConfigError);
    fs::remove_all(dir);
}
