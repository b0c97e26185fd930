#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "merplan/csv.hpp"
#include "merplan/curtailment.hpp"
#include "merplan/enumeration.hpp"
#include "merplan/errors.hpp"
#include "merplan/fragility.hpp"
#include "merplan/network.hpp"
#include "merplan/reduction.hpp"
#include "merplan/sizing.hpp"

namespace merplan {

/// Everything one planning run needs. Defaults to the standard study
/// parameters; any field can be overridden by config file or CLI flag.
struct RunConfig {
    std::string branches_file;
    std::string loads_file;
    int source_node = 1;
    bool source_can_island = false;

    FragilityParams fragility;
    double wind_speed_ms = 38.0;
    int n_scenarios = 10000;
    int k_reduced = 200;
    std::uint64_t seed = 1;

    MerGrid grid;  // candidate_nodes empty = use the critical-load nodes
    unsigned long long max_subsets_per_cell = kDefaultSubsetBudget;

    int worker_count = 0;  // 0 = hardware concurrency
    std::string out_dir = "out";

    void validate() const {
        if (branches_file.empty() || loads_file.empty()) {
            throw ConfigError("branches_file and loads_file are required");
        }
        namespace fs = std::filesystem;
        if (!fs::exists(branches_file)) throw ConfigError("no such file: " + branches_file);
        if (!fs::exists(loads_file)) throw ConfigError("no such file: " + loads_file);
        fragility.validate();
        if (wind_speed_ms < 0.0) throw ConfigError("wind_speed_ms must be >= 0");
        if (n_scenarios < 1) throw ConfigError("n_scenarios must be >= 1");
        if (k_reduced < 1) throw ConfigError("k_reduced must be >= 1");
        if (worker_count < 0) throw ConfigError("worker_count must be >= 0");
        // grid is validated after candidate defaulting, see effective_grid()
    }
};

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = csv::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        std::string key(csv::trim(sv.substr(0, eq)));
        std::string value(csv::trim(sv.substr(eq + 1)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

inline std::vector<int> parse_node_list(const std::string& text) {
    std::vector<int> out;
    for (const std::string& tok : csv::split(text, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<int>(csv::require_int(tok, "node list")));
    }
    return out;
}

/// Builds a RunConfig from key=value pairs. Relative file paths are resolved
/// against base_dir (the config file's directory). Unknown keys are errors.
inline RunConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 const std::string& base_dir = ".") {
    RunConfig cfg;
    auto resolve = [&](const std::string& p) {
        namespace fs = std::filesystem;
        fs::path path(p);
        return path.is_absolute() ? path.string() : (fs::path(base_dir) / path).string();
    };
    for (const auto& [key, value] : kv) {
        const std::string ctx = "config key " + key;
        if (key == "branches_file") cfg.branches_file = resolve(value);
        else if (key == "loads_file") cfg.loads_file = resolve(value);
        else if (key == "source_node") cfg.source_node = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "source_can_island") cfg.source_can_island = csv::require_int(value, ctx) != 0;
        else if (key == "p_normal") cfg.fragility.p_normal = csv::require_double(value, ctx);
        else if (key == "omega_crl") cfg.fragility.omega_crl = csv::require_double(value, ctx);
        else if (key == "omega_cpse") cfg.fragility.omega_cpse = csv::require_double(value, ctx);
        else if (key == "wind_speed_ms") cfg.wind_speed_ms = csv::require_double(value, ctx);
        else if (key == "n_scenarios") cfg.n_scenarios = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "k_reduced") cfg.k_reduced = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(csv::require_int(value, ctx));
        else if (key == "size_min_kw") cfg.grid.size_min_kw = csv::require_double(value, ctx);
        else if (key == "size_max_kw") cfg.grid.size_max_kw = csv::require_double(value, ctx);
        else if (key == "size_step_kw") cfg.grid.size_step_kw = csv::require_double(value, ctx);
        else if (key == "count_min") cfg.grid.count_min = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "count_max") cfg.grid.count_max = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "candidate_nodes") cfg.grid.candidate_nodes = parse_node_list(value);
        else if (key == "max_subsets_per_cell")
            cfg.max_subsets_per_cell = static_cast<unsigned long long>(csv::require_int(value, ctx));
        else if (key == "worker_count") cfg.worker_count = static_cast<int>(csv::require_int(value, ctx));
        else if (key == "out_dir") cfg.out_dir = resolve(value);
        else throw ConfigError("unknown config key: " + key);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    namespace fs = std::filesystem;
    std::string base = fs::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return config_from_map(parse_config_file(path), base);
}

namespace detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

}  // namespace detail

inline std::string render_matrix_csv(const ElcMatrix& m) {
    std::ostringstream out;
    out << "size_kw";
    for (int c : m.counts) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        out << csv::format_double(m.sizes_kw[r]);
        for (std::size_t c = 0; c < m.counts.size(); ++c) {
            out << ',' << csv::format_double(m.values[r][c]);
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_argmin_csv(const ElcMatrix& m) {
    std::ostringstream out;
    out << "size_kw,count,locations\n";
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        for (std::size_t c = 0; c < m.counts.size(); ++c) {
            out << csv::format_double(m.sizes_kw[r]) << ',' << m.counts[c] << ',';
            const std::vector<int>& locs = m.argmin_locations[r][c];
            for (std::size_t i = 0; i < locs.size(); ++i) {
                if (i) out << ';';
                out << locs[i];
            }
            out << '\n';
        }
    }
    return out.str();
}

inline std::string render_reduced_csv(const ReducedScenarioSet& reduced) {
    std::ostringstream out;
    out << "scenario_id,probability,out_branches\n";
    for (const ReducedScenario& rs : reduced.scenarios) {
        out << rs.scenario.id << ',' << csv::format_double(rs.probability) << ',';
        bool first = true;
        for (int b : rs.scenario.out_branches) {
            if (!first) out << ';';
            out << b;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_scenarios_csv(const std::vector<OutageScenario>& scenarios) {
    std::ostringstream out;
    out << "scenario_id,out_branches\n";
    for (const OutageScenario& sc : scenarios) {
        out << sc.id << ',';
        bool first = true;
        for (int b : sc.out_branches) {
            if (!first) out << ';';
            out << b;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

/// Matrix of d1 values with the size-averaged vector as a final row.
inline std::string render_d1_csv(const ElcMatrix& m, const DerivativeTables& t) {
    std::ostringstream out;
    out << "size_kw";
    for (int c : m.counts) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        out << csv::format_double(m.sizes_kw[r]);
        for (double v : t.d1_number[r]) out << ',' << csv::format_double(v);
        out << '\n';
    }
    out << "average";
    for (double v : t.d1_avg_over_sizes) out << ',' << csv::format_double(v);
    out << '\n';
    return out.str();
}

/// Matrix of d2 values with the count-averaged vector as a final column.
inline std::string render_d2_csv(const ElcMatrix& m, const DerivativeTables& t) {
    std::ostringstream out;
    out << "size_kw";
    for (int c : m.counts) out << ',' << c;
    out << ",average\n";
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        out << csv::format_double(m.sizes_kw[r]);
        for (double v : t.d2_size[r]) out << ',' << csv::format_double(v);
        out << ',' << csv::format_double(t.d2_avg_over_counts[r]) << '\n';
    }
    return out.str();
}

inline std::string render_fig_csv(const ElcMatrix& m, const DerivativeTables& t) {
    std::ostringstream out;
    out << "size_kw,d2_avg\n";
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        out << csv::format_double(m.sizes_kw[r]) << ','
            << csv::format_double(t.d2_avg_over_counts[r]) << '\n';
    }
    return out.str();
}

inline std::string render_summary_json(const SizingResult& result) {
    nlohmann::json j;
    j["optimal_count"] = result.optimal_count;
    j["optimal_total_kw"] = result.optimal_total_kw;
    j["flags"] = result.flags;
    return j.dump(2) + "\n";
}

/// Parses a labeled minimum-ELC matrix (header row of counts, first column
/// of sizes). Rejects malformed cells with the offending row and column.
inline ElcMatrix parse_matrix_csv(const std::string& path) {
    auto rows = csv::read_rows_file(path);
    if (rows.size() < 2) throw ParseError("matrix file needs a header and at least one row");

    ElcMatrix m;
    const auto& header = rows.front().second;
    if (header.size() < 2) throw ParseError("matrix header needs at least one count column");
    for (std::size_t c = 1; c < header.size(); ++c) {
        m.counts.push_back(static_cast<int>(
            csv::require_int(header[c], "matrix header column " + std::to_string(c + 1))));
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r].second;
        if (cells.size() != header.size()) {
            throw ParseError("matrix row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        const std::string row_ctx = "matrix row " + std::to_string(r + 1);
        m.sizes_kw.push_back(csv::require_double(cells[0], row_ctx + ", column 1"));
        std::vector<double> values;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            values.push_back(
                csv::require_double(cells[c], row_ctx + ", column " + std::to_string(c + 1)));
        }
        m.values.push_back(std::move(values));
    }
    m.argmin_locations.assign(m.sizes_kw.size(),
                              std::vector<std::vector<int>>(m.counts.size()));
    return m;
}

struct AnalyzeResult {
    DerivativeTables tables;
    SizingResult sizing;
    std::vector<std::string> written;
};

/// Derivative stage alone: differentiate a stored matrix and write the
/// analysis artifacts to out_dir.
inline AnalyzeResult analyze_matrix(const ElcMatrix& m, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    AnalyzeResult res;
    res.tables = differentiate(m);
    res.sizing = select_optimal(res.tables, m);

    auto emit = [&](const std::string& name, const std::string& content) {
        detail::write_file((fs::path(out_dir) / name).string(), content);
        res.written.push_back(name);
    };
    emit("d1_number.csv", render_d1_csv(m, res.tables));
    emit("d2_size.csv", render_d2_csv(m, res.tables));
    emit("fig6.csv", render_fig_csv(m, res.tables));
    emit("summary.json", render_summary_json(res.sizing));
    return res;
}

inline AnalyzeResult analyze_matrix_file(const std::string& matrix_path,
                                         const std::string& out_dir) {
    return analyze_matrix(parse_matrix_csv(matrix_path), out_dir);
}

struct RunReport {
    int generated_scenarios = 0;
    int reduced_scenarios = 0;
    SizingResult sizing;
    std::map<std::string, double> timings_ms;
    std::vector<std::string> written;  // artifact files, manifest last
};

inline std::map<std::string, std::string> config_echo(const RunConfig& cfg,
                                                      const std::vector<int>& candidates) {
    std::map<std::string, std::string> echo;
    echo["branches_file"] = cfg.branches_file;
    echo["loads_file"] = cfg.loads_file;
    echo["source_node"] = std::to_string(cfg.source_node);
    echo["source_can_island"] = cfg.source_can_island ? "1" : "0";
    echo["p_normal"] = csv::format_double(cfg.fragility.p_normal);
    echo["omega_crl"] = csv::format_double(cfg.fragility.omega_crl);
    echo["omega_cpse"] = csv::format_double(cfg.fragility.omega_cpse);
    echo["wind_speed_ms"] = csv::format_double(cfg.wind_speed_ms);
    echo["n_scenarios"] = std::to_string(cfg.n_scenarios);
    echo["k_reduced"] = std::to_string(cfg.k_reduced);
    echo["seed"] = std::to_string(cfg.seed);
    echo["size_min_kw"] = csv::format_double(cfg.grid.size_min_kw);
    echo["size_max_kw"] = csv::format_double(cfg.grid.size_max_kw);
    echo["size_step_kw"] = csv::format_double(cfg.grid.size_step_kw);
    echo["count_min"] = std::to_string(cfg.grid.count_min);
    echo["count_max"] = std::to_string(cfg.grid.count_max);
    std::string nodes;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i) nodes += ',';
        nodes += std::to_string(candidates[i]);
    }
    echo["candidate_nodes"] = nodes;
    echo["max_subsets_per_cell"] = std::to_string(cfg.max_subsets_per_cell);
    echo["worker_count"] = std::to_string(cfg.worker_count);
    echo["out_dir"] = cfg.out_dir;
    return echo;
}

/// Full planning pipeline: sample outages, reduce, reconfigure each reduced
/// scenario, build the minimum-ELC matrix, differentiate, select, and write
/// every artifact plus a manifest with content digests.
inline RunReport run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    cfg.validate();

    Network net = load_network_files(cfg.branches_file, cfg.loads_file, cfg.source_node);

    MerGrid grid = cfg.grid;
    if (grid.candidate_nodes.empty()) grid.candidate_nodes = net.critical_nodes();
    grid.validate();

    RunReport report;
    auto timed = [&](const char* stage, auto&& fn) {
        auto t0 = clock::now();
        auto result = fn();
        report.timings_ms[stage] =
            std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        return result;
    };

    auto scenarios = timed("generate", [&] {
        return generate_scenarios(net, cfg.fragility, cfg.wind_speed_ms, cfg.n_scenarios,
                                  cfg.seed, cfg.source_can_island);
    });
    report.generated_scenarios = static_cast<int>(scenarios.size());

    auto reduced =
        timed("reduce", [&] { return reduce_scenarios(scenarios, cfg.k_reduced, cfg.seed); });
    report.reduced_scenarios = static_cast<int>(reduced.scenarios.size());

    auto matrix = timed("matrix", [&] {
        BuildOptions opts;
        opts.workers = cfg.worker_count;
        opts.subset_budget = cfg.max_subsets_per_cell;
        return build_min_elc_matrix(net, reduced, grid, opts);
    });

    auto tables = timed("derivatives", [&] { return differentiate(matrix); });
    report.sizing = select_optimal(tables, matrix);

    fs::create_directories(cfg.out_dir);
    nlohmann::json manifest;
    manifest["config"] = config_echo(cfg, grid.candidate_nodes);
    manifest["seed"] = cfg.seed;
    manifest["generated_scenarios"] = report.generated_scenarios;
    manifest["requested_k"] = cfg.k_reduced;
    manifest["reduced_scenarios"] = report.reduced_scenarios;
    manifest["reduction_iterations"] = reduced.stats.iterations;
    manifest["digest_algorithm"] = "fnv1a64";

    auto emit = [&](const std::string& name, const std::string& content) {
        detail::write_file((fs::path(cfg.out_dir) / name).string(), content);
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a64(content)));
        manifest["outputs"].push_back(
            {{"file", name}, {"bytes", content.size()}, {"fnv1a64", std::string(hex)}});
        report.written.push_back(name);
    };

    auto t0 = clock::now();
    emit("reduced_scenarios.csv", render_reduced_csv(reduced));
    emit("elc_matrix.csv", render_matrix_csv(matrix));
    emit("elc_argmin.csv", render_argmin_csv(matrix));
    emit("d1_number.csv", render_d1_csv(matrix, tables));
    emit("d2_size.csv", render_d2_csv(matrix, tables));
    emit("fig6.csv", render_fig_csv(matrix, tables));
    emit("summary.json", render_summary_json(report.sizing));
    report.timings_ms["write"] =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    nlohmann::json timings;
    for (const auto& [stage, ms] : report.timings_ms) timings[stage] = ms;
    manifest["timings_ms"] = timings;
    detail::write_file((fs::path(cfg.out_dir) / "run_manifest.json").string(),
                       manifest.dump(2) + "\n");
    report.written.push_back("run_manifest.json");
    return report;
}

struct ScenarioValidation {
    Reconfiguration reconfig;
    std::vector<IslandReport> reports;
    std::vector<int> closed_ties;
    std::vector<int> open_ties;  // available ties left open
    double total_curtailment_kw = 0.0;
    int microgrids = 0;
    int isolates = 0;
};

/// One-scenario harness: reconfigure around an outage set, deploy the given
/// placement, and report the island breakdown.
inline ScenarioValidation validate_scenario(const Network& net, const std::set<int>& outages,
                                            const MerPlacement& placement) {
    ScenarioValidation v;
    v.reconfig = kruskal_spanning_forest(net, outages);
    v.reports = classify_islands(net, v.reconfig, placement);
    for (const Branch& b : net.branches()) {
        if (!b.is_tie || outages.count(b.id)) continue;
        if (v.reconfig.closed_branches.count(b.id)) v.closed_ties.push_back(b.id);
        else v.open_ties.push_back(b.id);
    }
    for (const IslandReport& r : v.reports) {
        v.total_curtailment_kw += r.curtailed_kw;
        if (r.kind == IslandKind::microgrid) ++v.microgrids;
        if (r.kind == IslandKind::isolate) ++v.isolates;
    }
    return v;
}

}  // namespace merplan
