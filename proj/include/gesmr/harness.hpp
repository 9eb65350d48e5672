#pragma once

/// @file harness.hpp
/// @brief Seeded multi-run execution, trace persistence and comparison reports.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gesmr/analysis.hpp"
#include "gesmr/config.hpp"
#include "gesmr/controllers.hpp"
#include "gesmr/engine.hpp"
#include "gesmr/oracles.hpp"
#include "gesmr/stats.hpp"
#include "gesmr/trace_io.hpp"

namespace gesmr {

namespace fs = std::filesystem;

/// One evolution of a resolved config.
inline std::vector<GenerationTrace> run_single(const RunConfig& resolved, std::uint64_t seed, std::size_t workers = 1) {
    const Objective obj = make_objective(resolved.objective, seed);
    AnyController controller = make_controller(resolved);
    return evolve(obj, evolution_params(resolved, seed, workers), controller);
}

/// In-memory traces for every seed, seeds run in parallel.
inline std::vector<std::vector<GenerationTrace>> run_traces(const RunConfig& config, std::size_t workers = 1) {
    const RunConfig c = resolve(config);
    std::vector<std::vector<GenerationTrace>> out(c.seeds.size());
    parallel_for(0, c.seeds.size(), workers, [&](std::size_t s) { out[s] = run_single(c, c.seeds[s]); });
    return out;
}

inline std::string trace_file_name(std::uint64_t seed) { return "trace_seed_" + std::to_string(seed) + ".csv"; }

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Writes manifest.json echoing the resolved config and the trace file list.
inline fs::path write_manifest(const fs::path& dir, const RunConfig& resolved, const nlohmann::json& extra = {}) {
    nlohmann::json m;
    m["config"] = to_json(resolved);
    m["oracle"] = is_oracle(resolved.algorithm.name);
    m["trace_columns"] = std::string(trace_header);
    nlohmann::json files = nlohmann::json::array();
    for (auto s : resolved.seeds) files.push_back({{"seed", s}, {"file", trace_file_name(s)}});
    m["traces"] = files;
    if (!extra.is_null())
        for (const auto& [k, v] : extra.items()) m[k] = v;
    const fs::path path = dir / "manifest.json";
    write_text(path, m.dump(2) + "\n");
    return path;
}

struct RunOutput {
    fs::path manifest;
    std::vector<fs::path> trace_files;
    std::vector<std::vector<GenerationTrace>> traces;
};

/// Executes one evolution per seed and writes one trace CSV per seed plus
/// the manifest into @p out_dir.
inline RunOutput run(const RunConfig& config, const fs::path& out_dir, std::size_t workers = 1) {
    const RunConfig c = resolve(config);
    if (is_oracle(c.algorithm.name)) throw ConfigError("use the ofmr or lamr commands for oracle algorithms");
    fs::create_directories(out_dir);
    RunOutput out;
    out.traces = run_traces(c, workers);
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
        out.trace_files.push_back(out_dir / trace_file_name(c.seeds[s]));
        write_trace_csv(out.trace_files.back().string(), out.traces[s]);
    }
    out.manifest = write_manifest(out_dir, c);
    return out;
}

// ---------------------------------------------------------------------------
// Comparison

struct AlgorithmRuns {
    std::string algorithm;
    ObjectiveConfig objective;
    bool oracle = false;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<GenerationTrace>> traces;  // per seed
};

/// Reads a run directory produced by run / ofmr / lamr.
inline AlgorithmRuns load_run(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    std::ifstream in(mpath);
    if (!in) throw ConfigError("manifest not found: " + mpath.string());
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest is not valid JSON: " + mpath.string());
    }
    const RunConfig c = config_from_json(m.at("config"));
    AlgorithmRuns r;
    r.algorithm = c.algorithm.name;
    r.objective = c.objective;
    r.oracle = m.value("oracle", is_oracle(r.algorithm));
    for (const auto& t : m.at("traces")) {
        r.seeds.push_back(t.at("seed").get<std::uint64_t>());
        r.traces.push_back(read_trace_csv((dir / t.at("file").get<std::string>()).string()));
    }
    return r;
}

struct ReportRow {
    std::string algorithm;
    std::string objective;
    std::size_t dim = 0;
    bool oracle = false;
    Vector final_elite;   // per seed
    Vector mean_elite;    // per seed, averaged over all records
    Vector log_mr_mse;    // per seed; empty without a reference
    double median_final_elite = 0.0;
    double median_mean_elite = 0.0;
    double median_log_mr_mse = std::numeric_limits<double>::quiet_NaN();
};

struct ComparisonReport {
    std::vector<ReportRow> rows;

    [[nodiscard]] const ReportRow* find(const std::string& algorithm, const std::string& objective) const {
        for (const auto& r : rows)
            if (r.algorithm == algorithm && r.objective == objective) return &r;
        return nullptr;
    }
};

inline double mean_elite(const std::vector<GenerationTrace>& traces) {
    double s = 0.0;
    for (const auto& t : traces) s += t.elite_f;
    return s / static_cast<double>(traces.size());
}

/// Log-MR error of one trace against a reference trace of the same length.
inline double trace_log_mr_mse(const std::vector<GenerationTrace>& a, const std::vector<GenerationTrace>& ref) {
    if (a.size() != ref.size()) throw std::invalid_argument("traces differ in generation count");
    return log_mr_mse(mr_curve(a), mr_curve(ref));
}

/// Final elite, mean elite over generations and log-MR error against the
/// reference of the same objective (matched by name and dim; seed s uses
/// reference trace s, or the only reference trace when there is one).
inline ComparisonReport compare(const std::vector<AlgorithmRuns>& runs, const std::vector<AlgorithmRuns>& references) {
    ComparisonReport report;
    std::size_t length = 0;
    auto check_length = [&](const std::vector<GenerationTrace>& t) {
        if (t.empty()) throw std::invalid_argument("empty trace in comparison");
        if (length == 0) length = t.size();
        if (t.size() != length) throw std::invalid_argument("traces in a comparison must share the generation count");
    };
    for (const auto& ref : references)
        for (const auto& t : ref.traces) check_length(t);
    for (const auto& run : runs) {
        ReportRow row;
        row.algorithm = run.algorithm;
        row.objective = run.objective.name;
        row.dim = run.objective.dim;
        row.oracle = run.oracle || is_oracle(run.algorithm);
        const AlgorithmRuns* ref = nullptr;
        for (const auto& r : references)
            if (r.objective.name == run.objective.name && r.objective.dim == run.objective.dim) ref = &r;
        if (ref && ref->traces.size() != 1 && ref->traces.size() != run.traces.size())
            throw std::invalid_argument("reference has " + std::to_string(ref->traces.size()) + " seeds, run has " +
                                        std::to_string(run.traces.size()));
        for (std::size_t s = 0; s < run.traces.size(); ++s) {
            const auto& t = run.traces[s];
            check_length(t);
            row.final_elite.push_back(t.back().elite_f);
            row.mean_elite.push_back(mean_elite(t));
            if (ref) row.log_mr_mse.push_back(trace_log_mr_mse(t, ref->traces[ref->traces.size() == 1 ? 0 : s]));
        }
        if (row.final_elite.empty()) throw std::invalid_argument("run " + run.algorithm + " has no traces");
        row.median_final_elite = median(row.final_elite);
        row.median_mean_elite = median(row.mean_elite);
        if (!row.log_mr_mse.empty()) row.median_log_mr_mse = median(row.log_mr_mse);
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline std::string report_csv(const ComparisonReport& report) {
    std::ostringstream out;
    out << "algorithm,objective,dim,oracle,median_final_elite,median_mean_elite,median_log_mr_mse\n";
    for (const auto& r : report.rows)
        out << r.algorithm << ',' << r.objective << ',' << r.dim << ',' << (r.oracle ? 1 : 0) << ','
            << format_real(r.median_final_elite) << ',' << format_real(r.median_mean_elite) << ','
            << (std::isnan(r.median_log_mr_mse) ? std::string("nan") : format_real(r.median_log_mr_mse)) << '\n';
    return out.str();
}

inline nlohmann::json report_json(const ComparisonReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json j = {{"algorithm", r.algorithm},
                            {"objective", r.objective},
                            {"dim", r.dim},
                            {"oracle", r.oracle},
                            {"final_elite", r.final_elite},
                            {"mean_elite", r.mean_elite},
                            {"median_final_elite", r.median_final_elite},
                            {"median_mean_elite", r.median_mean_elite}};
        if (!r.log_mr_mse.empty()) {
            j["log_mr_mse"] = r.log_mr_mse;
            j["median_log_mr_mse"] = r.median_log_mr_mse;
        }
        rows.push_back(j);
    }
    return {{"rows", rows}};
}

// ---------------------------------------------------------------------------
// Oracle runs persisted like ordinary runs

/// LAMR over every seed of @p config; writes traces, the sigma curve and a manifest.
inline RunOutput run_lamr(RunConfig config, const LookaheadPlan& plan, const fs::path& out_dir,
                          std::size_t workers = 1) {
    config.algorithm.name = "lamr";
    const RunConfig c = resolve(config);
    fs::create_directories(out_dir);
    RunOutput out;
    out.traces.resize(c.seeds.size());
    std::vector<std::uint64_t> lookahead(c.seeds.size());
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
        const Objective obj = make_objective(c.objective, c.seeds[s]);
        auto result = lamr_run(obj, evolution_params(c, c.seeds[s], workers), plan);
        lookahead[s] = result.lookahead_evaluations;
        out.traces[s] = std::move(result.traces);
        out.trace_files.push_back(out_dir / trace_file_name(c.seeds[s]));
        write_trace_csv(out.trace_files.back().string(), out.traces[s]);
    }
    nlohmann::json extra = {{"lookahead",
                             {{"period", plan.period},
                              {"repeats_per_sigma", plan.repeats_per_sigma},
                              {"grid", plan.grid.values},
                              {"evaluations", lookahead}}}};
    out.manifest = write_manifest(out_dir, c, extra);
    return out;
}

/// OFMR over the seeds of @p config; writes the traces of the selected sigma.
inline std::pair<OfmrResult, RunOutput> run_ofmr(RunConfig config, const MrGrid& grid, const fs::path& out_dir,
                                                 std::size_t workers = 1) {
    config.algorithm.name = "ofmr";
    const RunConfig c = resolve(config);
    if (c.objective.name == "mlp_task")
        throw ConfigError("ofmr shares one objective across seeds; mlp_task datasets are per seed");
    fs::create_directories(out_dir);
    const Objective obj = make_objective(c.objective, c.seeds.front());
    auto result = ofmr_search(grid, obj, evolution_params(c, c.seeds.front(), workers), c.seeds);
    RunOutput out;
    out.traces = result.traces[result.best_index];
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
        out.trace_files.push_back(out_dir / trace_file_name(c.seeds[s]));
        write_trace_csv(out.trace_files.back().string(), out.traces[s]);
    }
    nlohmann::json extra = {{"ofmr",
                             {{"grid", grid.values},
                              {"median_final_elite", result.median_final_elite},
                              {"best_sigma", result.best_sigma}}}};
    out.manifest = write_manifest(out_dir, c, extra);
    return {std::move(result), std::move(out)};
}

} // namespace gesmr
