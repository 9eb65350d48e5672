#pragma once

/// @file trace_io.hpp
/// @brief Trace CSV files: header row, one record per generation.
///
/// Columns: generation, elite_f, mean_f, mean_log10_mr, min_mr, max_mr, cum_evals.
/// Reals use the shortest representation that reads back bit-identically.

#include <charconv>
#include <cmath>
#include <limits>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gesmr/engine.hpp"
#include "gesmr/errors.hpp"

namespace gesmr {

inline constexpr std::string_view trace_header = "generation,elite_f,mean_f,mean_log10_mr,min_mr,max_mr,cum_evals";

inline std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_real(std::string_view s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument("bad number in trace: '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_count(std::string_view s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument("bad count in trace: '" + std::string(s) + "'");
    return v;
}

inline void write_trace_csv(std::ostream& out, const std::vector<GenerationTrace>& traces) {
    out << trace_header << '\n';
    for (const auto& t : traces) {
        out << t.generation << ',' << format_real(t.elite_f) << ',' << format_real(t.mean_f) << ','
            << format_real(t.mean_log10_mr) << ',' << format_real(t.min_mr) << ',' << format_real(t.max_mr) << ','
            << t.cum_evals << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const std::vector<GenerationTrace>& traces) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file " + path);
    write_trace_csv(out, traces);
}

inline std::vector<GenerationTrace> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != trace_header) throw std::invalid_argument("trace file has an unexpected header");
    std::vector<GenerationTrace> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        for (std::size_t p; (p = rest.find(',')) != std::string_view::npos; rest.remove_prefix(p + 1))
            cols.push_back(rest.substr(0, p));
        cols.push_back(rest);
        if (cols.size() != 7) throw std::invalid_argument("trace row has " + std::to_string(cols.size()) + " columns");
        GenerationTrace t;
        t.generation = static_cast<std::size_t>(parse_count(cols[0]));
        t.elite_f = parse_real(cols[1]);
        t.mean_f = parse_real(cols[2]);
        t.mean_log10_mr = parse_real(cols[3]);
        t.min_mr = parse_real(cols[4]);
        t.max_mr = parse_real(cols[5]);
        t.cum_evals = parse_count(cols[6]);
        if (!out.empty() && t.generation != out.back().generation + 1)
            throw std::invalid_argument("trace has a generation gap at " + std::to_string(t.generation));
        out.push_back(t);
    }
    return out;
}

inline std::vector<GenerationTrace> read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read trace file " + path);
    return read_trace_csv(in);
}

/// sigma(t) = 10^mean_log10_mr per record.
inline Vector mr_curve(const std::vector<GenerationTrace>& traces) {
    Vector out;
    out.reserve(traces.size());
    for (const auto& t : traces) out.push_back(std::pow(10.0, t.mean_log10_mr));
    return out;
}

} // namespace gesmr
