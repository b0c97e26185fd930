// End-to-end checks of the command-line binary via subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "merplan/pipeline.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string text;
};

CliResult run_cli(const std::string& args, bool capture_stderr_only = false) {
    std::string cmd = std::string(MERPLAN_CLI_PATH) + " " + args;
    cmd += capture_stderr_only ? " 2>&1 1>/dev/null" : " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) r.text.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("merplan_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& extra = "") {
    fs::path path = dir / "run.conf";
    std::ofstream out(path);
    out << "branches_file = " << ts::data_path("ieee33_branches.csv") << "\n"
        << "loads_file = " << ts::data_path("ieee33_loads.csv") << "\n"
        << "wind_speed_ms = 38\n"
        << "n_scenarios = 60\n"
        << "k_reduced = 6\n"
        << "seed = 4\n"
        << "size_min_kw = 500\n"
        << "size_max_kw = 700\n"
        << "size_step_kw = 100\n"
        << "count_min = 1\n"
        << "count_max = 2\n"
        << "candidate_nodes = 6,11,15\n"
        << "worker_count = 1\n"
        << "out_dir = " << (dir / "out").string() << "\n"
        << extra;
    return path;
}

}  // namespace

TEST(Cli, RunSubcommandProducesTheArtifactSet) {
    fs::path dir = scratch_dir("run");
    fs::path conf = write_config(dir);
    CliResult r = run_cli("run --config " + conf.string());
    ASSERT_EQ(r.exit_code, 0) << r.text;
    EXPECT_NE(r.text.find("optimal_count:"), std::string::npos);
    for (const char* name : {"reduced_scenarios.csv", "elc_matrix.csv", "elc_argmin.csv",
                             "d1_number.csv", "d2_size.csv", "fig6.csv", "summary.json",
                             "run_manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / name)) << name;
    }
}

TEST(Cli, FlagsOverrideTheConfigFile) {
    fs::path dir = scratch_dir("flags");
    fs::path conf = write_config(dir);
    fs::path other = dir / "other_out";
    CliResult r =
        run_cli("run --config " + conf.string() + " --out " + other.string() + " --seed 99");
    ASSERT_EQ(r.exit_code, 0) << r.text;
    EXPECT_TRUE(fs::exists(other / "elc_matrix.csv"));
    auto manifest =
        nlohmann::json::parse(merplan::detail::read_file((other / "run_manifest.json").string()));
    EXPECT_EQ(manifest["seed"], 99);
}

TEST(Cli, InvalidConfigFailsWithMachineReadableError) {
    fs::path dir = scratch_dir("invalid");
    fs::path conf = write_config(dir, "k_reduced = 0\n");
    CliResult r = run_cli("run --config " + conf.string(), /*capture_stderr_only=*/true);
    EXPECT_NE(r.exit_code, 0);
    ASSERT_FALSE(r.text.empty());
    // a single line of JSON naming the error kind
    EXPECT_EQ(std::count(r.text.begin(), r.text.end(), '\n'), 1);
    auto err = nlohmann::json::parse(r.text);
    EXPECT_EQ(err["error"], "ConfigError");
    EXPECT_FALSE(err["message"].get<std::string>().empty());
}

TEST(Cli, AnalyzeReportsParseErrorsCleanly) {
    fs::path dir = scratch_dir("analyze_err");
    CliResult r = run_cli("analyze --matrix /no/such/matrix.csv --out " + (dir / "out").string(),
                          /*capture_stderr_only=*/true);
    EXPECT_NE(r.exit_code, 0);
    auto err = nlohmann::json::parse(r.text);
    EXPECT_EQ(err["error"], "ParseError");
}

TEST(Cli, GenScenariosIsSeedDeterministic) {
    fs::path dir = scratch_dir("gen");
    fs::path conf = write_config(dir);
    CliResult a = run_cli("gen-scenarios --config " + conf.string());
    CliResult b = run_cli("gen-scenarios --config " + conf.string());
    CliResult c = run_cli("gen-scenarios --config " + conf.string() + " --seed 8");
    ASSERT_EQ(a.exit_code, 0);
    EXPECT_EQ(a.text, b.text);
    EXPECT_NE(a.text, c.text);
    EXPECT_EQ(a.text.rfind("scenario_id,out_branches\n", 0), 0u);

    fs::path file = dir / "pop.csv";
    CliResult d = run_cli("gen-scenarios --config " + conf.string() + " --out " + file.string());
    ASSERT_EQ(d.exit_code, 0);
    EXPECT_EQ(merplan::detail::read_file(file.string()), a.text);
}

TEST(Cli, ValidateScenarioWithoutMersShowsIsolatesOnly) {
    CliResult r = run_cli("validate-scenario --branches " + ts::data_path("ieee33_branches.csv") +
                          " --loads " + ts::data_path("ieee33_loads.csv") +
                          " --outages 3,6,15,19,25,30,32");
    ASSERT_EQ(r.exit_code, 0) << r.text;
    EXPECT_NE(r.text.find("microgrids: 0"), std::string::npos);
    EXPECT_NE(r.text.find("isolates: 4"), std::string::npos);
    EXPECT_NE(r.text.find("total_curtailment_kw: 875"), std::string::npos);
}
