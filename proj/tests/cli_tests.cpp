// End-to-end tests that drive the installed binary through popen. The cases
// run in declaration order and share one workspace under the system temp dir.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "barriernet/config.hpp"
#include "barriernet/dataset_io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd = env_prefix + BARRIERNET_CLI_PATH + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    RunResult r;
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

const fs::path kWorkspace = fs::temp_directory_path() / "bnet_cli_ws";

std::string config_arg() { return "--config " + (kWorkspace / "config.json").string(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

barriernet::PipelineConfig workspace_config() {
    return barriernet::PipelineConfig::load(kWorkspace / "config.json");
}

}  // namespace

TEST_CASE("workspace setup") {
    fs::remove_all(kWorkspace);
    fs::create_directories(kWorkspace);
    std::ofstream cfg(kWorkspace / "config.json");
    cfg << R"({
  "profile": "KR",
  "seed": 11,
  "window": 20,
  "data_dir": ")" << (kWorkspace / "data").string() << R"(",
  "out_dir": ")" << (kWorkspace / "out").string() << R"(",
  "labels": [{"horizon_days": 3, "barrier_pct": 0.10}],
  "splits": {
    "train": ["2006-01-01", "2006-03-31"],
    "validation": ["2006-04-01", "2006-04-30"],
    "test": ["2006-05-01", "2006-12-31"]
  },
  "network": {"blocks": 2, "channels": 4, "kernels": [3, 3]},
  "train": {"epochs": 2, "batch_size": 16},
  "thresholds": [0, 0.5, 0.9]
})";
    cfg.close();
    REQUIRE(fs::exists(kWorkspace / "config.json"));
}

TEST_CASE("help exits cleanly, unknown commands do not") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("frobnicate").code != 0);
    CHECK(run_cli("").code != 0);  // a subcommand is required
}

TEST_CASE("config errors exit with code 2") {
    auto bad = kWorkspace / "bad.json";
    std::ofstream(bad) << R"({"bogus": 1})";
    auto r = run_cli("ingest --config " + bad.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("bogus") != std::string::npos);

    auto missing = run_cli("ingest --config " + (kWorkspace / "nope.json").string());
    CHECK(missing.code == 2);

    std::ofstream(bad) << R"({"thresholds": [0.9, 0.1]})";
    CHECK(run_cli("ingest --config " + bad.string()).code == 2);
}

TEST_CASE("each step names its missing prerequisite with exit 3") {
    auto expect_prereq = [](const std::string& args, const std::string& producer) {
        auto r = run_cli(args + " " + config_arg());
        CHECK(r.code == 3);
        CHECK(r.output.find(producer) != std::string::npos);
    };
    expect_prereq("ingest", "synth");
    expect_prereq("label", "synth");
    expect_prereq("stats", "label");
    expect_prereq("train", "label");
    expect_prereq("predict", "train");
    expect_prereq("sweep", "predict");
    expect_prereq("select", "sweep");
    expect_prereq("backtest", "select");
    expect_prereq("report", "backtest");
}

TEST_CASE("synth writes a deterministic universe") {
    auto r1 = run_cli("synth --tickers 4 --days 120 " + config_arg());
    REQUIRE(r1.code == 0);
    auto main_csv = slurp(kWorkspace / "data" / "SYN000.csv");
    REQUIRE(!main_csv.empty());

    auto alt = (kWorkspace / "data_alt").string();
    auto r2 = run_cli("synth --tickers 4 --days 120 --data " + alt + " " + config_arg());
    REQUIRE(r2.code == 0);
    CHECK(slurp(kWorkspace / "data_alt" / "SYN000.csv") == main_csv);

    // A different seed must produce different bars.
    auto alt2 = (kWorkspace / "data_seed").string();
    auto r3 = run_cli("synth --tickers 4 --days 120 --seed 99 --data " + alt2 + " " + config_arg());
    REQUIRE(r3.code == 0);
    CHECK(slurp(kWorkspace / "data_seed" / "SYN000.csv") != main_csv);
}

TEST_CASE("the environment variable can point at the data directory") {
    auto env = "BARRIERNET_DATA_DIR=" + (kWorkspace / "data_alt").string() + " ";
    auto r = run_cli("ingest " + config_arg(), env);
    CHECK(r.code == 0);
}

TEST_CASE("ingest, label and stats produce their artifacts") {
    REQUIRE(run_cli("ingest " + config_arg()).code == 0);
    auto cfg = workspace_config();
    barriernet::ArtifactPaths paths(cfg);
    CHECK(fs::exists(cfg.out_dir / ("universe_" + paths.hash + ".csv")));

    REQUIRE(run_cli("label " + config_arg()).code == 0);
    for (const char* split : {"train", "validation", "test"}) {
        CHECK(fs::exists(paths.dataset(cfg.labels[0], split)));
        CHECK(fs::exists(paths.manifest(cfg.labels[0], split)));
    }
    auto rows = barriernet::load_manifest(paths.manifest(cfg.labels[0], "test"));
    CHECK(!rows.empty());
    for (const auto& row : rows) CHECK(cfg.test_split.contains(row.date));

    REQUIRE(run_cli("stats " + config_arg()).code == 0);
    auto stats_text = slurp(paths.stats());
    CHECK(stats_text.find("train") != std::string::npos);
    CHECK(stats_text.find("validation") != std::string::npos);
    CHECK(stats_text.find("test") != std::string::npos);
}

TEST_CASE("train, predict, sweep and select complete the model half") {
    auto cfg = workspace_config();
    barriernet::ArtifactPaths paths(cfg);

    REQUIRE(run_cli("train " + config_arg()).code == 0);
    CHECK(fs::exists(paths.checkpoint(cfg.labels[0])));
    CHECK(fs::exists(paths.history(cfg.labels[0])));

    REQUIRE(run_cli("predict " + config_arg()).code == 0);
    CHECK(fs::exists(paths.predictions(cfg.labels[0], "test")));

    REQUIRE(run_cli("sweep " + config_arg()).code == 0);
    CHECK(fs::exists(paths.metrics(cfg.labels[0], "test")));

    REQUIRE(run_cli("select " + config_arg()).code == 0);
    CHECK(fs::exists(paths.selected("test")));

    // Re-running the deterministic steps rewrites identical bytes.
    auto pred_bytes = slurp(paths.predictions(cfg.labels[0], "test"));
    auto metrics_bytes = slurp(paths.metrics(cfg.labels[0], "test"));
    REQUIRE(run_cli("predict " + config_arg()).code == 0);
    REQUIRE(run_cli("sweep " + config_arg()).code == 0);
    CHECK(slurp(paths.predictions(cfg.labels[0], "test")) == pred_bytes);
    CHECK(slurp(paths.metrics(cfg.labels[0], "test")) == metrics_bytes);
}

TEST_CASE("backtest and report close the loop") {
    auto cfg = workspace_config();
    barriernet::ArtifactPaths paths(cfg);

    REQUIRE(run_cli("backtest " + config_arg()).code == 0);
    CHECK(fs::exists(paths.reports("test")));
    auto reports_text = slurp(paths.reports("test"));
    CHECK(reports_text.find("random_") != std::string::npos);

    REQUIRE(run_cli("report " + config_arg()).code == 0);
    CHECK(fs::exists(paths.report_table("test")));

    // Explicit backtest parameters bypass the selection file.
    auto r = run_cli("backtest --horizon 3 --pct 0.10 --threshold 0.5 --no-sidecut " + config_arg());
    REQUIRE(r.code == 0);
    auto adhoc = slurp(paths.reports("test"));
    CHECK(adhoc.find("sidecut_False") != std::string::npos);
}

TEST_CASE("global flags are accepted before and after the subcommand") {
    auto out_a = (kWorkspace / "out_a").string();
    auto out_b = (kWorkspace / "out_b").string();
    CHECK(run_cli("--out " + out_a + " ingest " + config_arg()).code == 0);
    CHECK(run_cli("ingest --out " + out_b + " " + config_arg()).code == 0);
    CHECK(fs::exists(out_a));
    CHECK(fs::exists(out_b));
}

TEST_CASE("predict validates the split name") {
    auto r = run_cli("predict --split nope " + config_arg());
    CHECK(r.code == 2);
    CHECK(r.output.find("split") != std::string::npos);
}
