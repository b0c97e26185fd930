#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "merplan/pipeline.hpp"

namespace {

void print_validation(const merplan::ScenarioValidation& v) {
    auto print_ids = [](const char* label, const std::vector<int>& ids) {
        std::cout << label << ':';
        for (int id : ids) std::cout << ' ' << id;
        std::cout << '\n';
    };
    print_ids("closed_ties", v.closed_ties);
    print_ids("open_ties", v.open_ties);
    std::cout << "islands:\n";
    for (const merplan::IslandReport& r : v.reports) {
        std::cout << "  " << r.island << ' ' << merplan::to_string(r.kind)
                  << " critical_kw=" << merplan::csv::format_double(r.critical_load_kw)
                  << " capacity_kw=" << merplan::csv::format_double(r.mer_capacity_kw)
                  << " curtailed_kw=" << merplan::csv::format_double(r.curtailed_kw) << " nodes=";
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            if (i) std::cout << ';';
            std::cout << r.nodes[i];
        }
        std::cout << '\n';
    }
    std::cout << "microgrids: " << v.microgrids << '\n';
    std::cout << "isolates: " << v.isolates << '\n';
    std::cout << "total_curtailment_kw: " << merplan::csv::format_double(v.total_curtailment_kw)
              << '\n';
}

void print_sizing(const merplan::SizingResult& s) {
    std::cout << "optimal_count: " << s.optimal_count << '\n';
    std::cout << "optimal_total_kw: " << merplan::csv::format_double(s.optimal_total_kw) << '\n';
    for (const std::string& f : s.flags) std::cout << "flag: " << f << '\n';
}

int fail(const std::string& code, const std::string& message) {
    nlohmann::json j{{"error", code}, {"message", message}};
    std::cerr << j.dump() << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"movable energy resource planning for radial distribution feeders"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string matrix_path;
    std::string branches_file;
    std::string loads_file;
    std::string outages_arg;
    std::string mer_nodes_arg;
    double mer_size = 0.0;
    int source_node = 1;
    int workers = -1;
    long long seed = -1;
    long long n_scenarios = -1;

    CLI::App* run = app.add_subcommand("run", "full planning pipeline");
    run->add_option("--config", config_path, "key=value config file")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "override the output directory");
    run->add_option("--workers", workers, "override the worker count (0 = auto)");

    CLI::App* analyze = app.add_subcommand("analyze", "derivative analysis of a stored matrix");
    analyze->add_option("--matrix", matrix_path, "minimum-ELC matrix CSV")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();

    CLI::App* validate =
        app.add_subcommand("validate-scenario", "reconfigure one outage set and report islands");
    validate->add_option("--branches", branches_file, "branch CSV")->required();
    validate->add_option("--loads", loads_file, "load CSV")->required();
    validate->add_option("--source", source_node, "source node id");
    validate->add_option("--outages", outages_arg, "comma-separated outaged branch ids")
        ->required();
    validate->add_option("--mer-nodes", mer_nodes_arg, "comma-separated MER nodes");
    validate->add_option("--mer-size", mer_size, "per-unit MER size in kW");

    CLI::App* gen = app.add_subcommand("gen-scenarios", "sample the outage population as CSV");
    gen->add_option("--config", config_path, "key=value config file")->required();
    gen->add_option("--seed", seed, "override the config seed");
    gen->add_option("--n", n_scenarios, "override the scenario count");
    gen->add_option("--out", out_dir, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            merplan::RunConfig cfg = merplan::load_config(config_path);
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (workers >= 0) cfg.worker_count = workers;
            merplan::RunReport report = merplan::run_pipeline(cfg);
            std::cout << "scenarios: " << report.generated_scenarios << " generated, "
                      << report.reduced_scenarios << " after reduction\n";
            print_sizing(report.sizing);
            std::cout << "artifacts: " << cfg.out_dir << '\n';
        } else if (analyze->parsed()) {
            merplan::AnalyzeResult res = merplan::analyze_matrix_file(matrix_path, out_dir);
            print_sizing(res.sizing);
            std::cout << "artifacts: " << out_dir << '\n';
        } else if (validate->parsed()) {
            merplan::Network net =
                merplan::load_network_files(branches_file, loads_file, source_node);
            std::set<int> outages;
            for (int id : merplan::parse_node_list(outages_arg)) outages.insert(id);
            merplan::MerPlacement placement;
            for (int node : merplan::parse_node_list(mer_nodes_arg)) {
                placement.locations.insert(node);
            }
            placement.unit_size_kw = placement.locations.empty() ? 1.0 : mer_size;
            print_validation(merplan::validate_scenario(net, outages, placement));
        } else if (gen->parsed()) {
            merplan::RunConfig cfg = merplan::load_config(config_path);
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (n_scenarios > 0) cfg.n_scenarios = static_cast<int>(n_scenarios);
            cfg.validate();
            merplan::Network net = merplan::load_network_files(cfg.branches_file, cfg.loads_file,
                                                               cfg.source_node);
            auto scenarios =
                merplan::generate_scenarios(net, cfg.fragility, cfg.wind_speed_ms,
                                            cfg.n_scenarios, cfg.seed, cfg.source_can_island);
            std::string csv = merplan::render_scenarios_csv(scenarios);
            if (out_dir.empty()) {
                std::cout << csv;
            } else {
                merplan::detail::write_file(out_dir, csv);
                std::cout << "wrote " << scenarios.size() << " scenarios to " << out_dir << '\n';
            }
        }
    } catch (const merplan::Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
