#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trophic/config.hpp"
#include "trophic/experiments.hpp"
#include "trophic/metrics.hpp"
#include "trophic/network.hpp"
#include "trophic/trainer.hpp"

using namespace trophic;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("trophic_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
#ifdef TROPHIC_CLI_PATH
    const std::string cmd = std::string(TROPHIC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
#else
    (void)args;
    return -1;
#endif
}

} // namespace

TEST_CASE("config parsing, sections, overrides and hashing") {
    Config cfg = Config::from_string("[run]\nexperiment = prediction\nseed = 4 # trailing comment\n"
                                     "[task]\nkind = sine\n");
    CHECK(cfg.get_string("run.experiment", "") == "prediction");
    CHECK(cfg.get_u64("run.seed", 0) == 4);
    CHECK(cfg.get_string("task.kind", "") == "sine");
    cfg.apply_override("task.period=25");
    CHECK(cfg.get_double("task.period", 0) == 25.0);

    const std::uint64_t h1 = cfg.hash();
    cfg.set("task.period", "26");
    CHECK(cfg.hash() != h1);

    CHECK_THROWS_AS(Config::from_string("key_without_value\n"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get_double("task.kind", 0.0), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected by name") {
    Config cfg = Config::from_string("[task]\nknd = sine\n");
    CHECK_THROWS_WITH_AS(cfg.validate_keys(config_schema()), doctest::Contains("task.knd"),
                         std::invalid_argument);
}

TEST_CASE("network construction is a pure function of the seed") {
    NetworkConfig ncfg;
    ncfg.blocks = 4;
    ncfg.block_size = 8;
    ncfg.seed = 42;
    const Network a = Network::build(ncfg);
    const Network b = Network::build(ncfg);
    CHECK(a.w == b.w);
    CHECK(a.w_in.v == b.w_in.v);
    CHECK(a.heads.bias == b.heads.bias);
    ncfg.seed = 43;
    const Network c = Network::build(ncfg);
    CHECK(!(a.w == c.w));
    // row budget honored
    for (int i = 0; i < 4; ++i) CHECK(a.w.row_occupancy(i) <= a.layout.max_row_blocks);
}

TEST_CASE("trainer checkpoint round trip resumes the exact run") {
    Config cfg = Config::from_string("[network]\nblocks = 4\nblock_size = 8\n[structure]\nperiod = 40\n");
    NetworkConfig ncfg = NetworkConfig::from_config(cfg, 1, 1);
    ncfg.seed = 9;
    TrainerOptions opt = TrainerOptions::from_config(cfg);

    Trainer full(Network::build(ncfg), opt);
    Trainer head(Network::build(ncfg), opt);
    std::vector<double> full_mse, tail_mse;
    auto u = [](int t) { return std::sin(0.2 * t); };
    for (int t = 0; t < 150; ++t) full_mse.push_back(full.step_scalar(u(t), u(t + 1)).mse);

    std::stringstream buf;
    for (int t = 0; t < 90; ++t) head.step_scalar(u(t), u(t + 1));
    head.save(buf);
    Trainer resumed = Trainer::load(buf, opt);
    CHECK(resumed.global_step() == 90);
    for (int t = 90; t < 150; ++t) tail_mse.push_back(resumed.step_scalar(u(t), u(t + 1)).mse);
    for (int k = 0; k < 60; ++k) CHECK(tail_mse[k] == full_mse[90 + k]);
    CHECK(resumed.net().w == full.net().w);
}

TEST_CASE("metrics sink writes hash-consistent json lines and csv curves") {
    const fs::path dir = temp_dir("sink");
    {
        MetricsSink sink((dir / "m.jsonl").string(), "exp", "deadbeef00000000");
        sink.record(1, "a", 0.5);
        sink.record(2, "a", 0.25);
        sink.record_json(3, "structural_event", {{"theta", 1.0}});
        sink.write_curves_csv(dir.string());
    }
    const auto records = read_metric_file((dir / "m.jsonl").string());
    CHECK(records.size() == 3);
    CHECK(records[0].metric == "a");
    CHECK(records[0].value == 0.5);
    CHECK(metric_values(records, "a").size() == 2);
    CHECK(slurp((dir / "a.csv").string()) == "step,value\n1,0.5\n2,0.25\n");

    // mixed hashes are rejected on read
    std::ofstream app((dir / "m.jsonl"), std::ios::app);
    app << R"({"config":"1111111111111111","experiment":"exp","metric":"a","step":4,"value":1.0})" << "\n";
    app.close();
    CHECK_THROWS_AS(read_metric_file((dir / "m.jsonl").string()), std::runtime_error);
}

TEST_CASE("svg renderer emits a polyline per series") {
    const fs::path dir = temp_dir("svg");
    write_svg_line_chart((dir / "c.svg").string(), "curve", {{0, 1.0}, {10, 2.0}, {20, 0.5}});
    const std::string svg = slurp((dir / "c.svg").string());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("prediction experiment is byte-deterministic and replayable") {
    const fs::path dir = temp_dir("pred");
    Config cfg = Config::from_string("[run]\nexperiment = prediction\nseed = 3\n"
                                     "[network]\nblocks = 4\nblock_size = 8\n"
                                     "[task]\nkind = sine\nperiod = 40\n"
                                     "[prediction]\nsteps = 120\ncheckpoint_step = 60\n");
    cfg.validate_keys(config_schema());

    auto run_into = [&](const std::string& sub) {
        const fs::path out = dir / sub;
        fs::create_directories(out);
        MetricsSink sink((out / "metrics.jsonl").string(), "prediction", cfg.hash_hex());
        experiments::run_prediction(cfg, &sink, out.string());
        return out;
    };
    const fs::path a = run_into("a");
    const fs::path b = run_into("b");
    CHECK(slurp((a / "metrics.jsonl").string()) == slurp((b / "metrics.jsonl").string()));

    // replay from the mid-run checkpoint reproduces the tail records exactly
    const fs::path r = dir / "replay";
    fs::create_directories(r);
    {
        MetricsSink sink((r / "metrics.jsonl").string(), "prediction", cfg.hash_hex());
        experiments::replay_prediction(cfg, &sink, (a / "checkpoint.bin").string());
    }
    const auto orig = read_metric_file((a / "metrics.jsonl").string());
    const auto tail = read_metric_file((r / "metrics.jsonl").string());
    REQUIRE(!tail.empty());
    std::vector<MetricRecord> expect;
    for (const auto& rec : orig)
        if (rec.step >= 60 && (rec.metric == "prediction/mse" || rec.metric == "prediction/mse_ewma"))
            expect.push_back(rec);
    REQUIRE(expect.size() == tail.size());
    for (std::size_t i = 0; i < tail.size(); ++i) {
        CHECK(tail[i].metric == expect[i].metric);
        CHECK(tail[i].value == expect[i].value);
        CHECK(tail[i].step == expect[i].step);
    }
}

TEST_CASE("capacity formula basics") {
    CHECK(experiments::compositional_capacity(64, 0, 32) == doctest::Approx(1.0));
    CHECK(experiments::compositional_capacity(5, 2, 10, 0.1) == doctest::Approx(10.0));
    // C(64,4) * (0.15 * 32)^4
    CHECK(experiments::compositional_capacity(64, 4, 32, 0.15) == doctest::Approx(635376.0 * 530.8416).epsilon(1e-12));
}

TEST_CASE("cli: validate-config, run determinism, bad key naming") {
    const fs::path dir = temp_dir("cli");
    const fs::path cfg_path = dir / "small.cfg";
    std::ofstream(cfg_path) << "[run]\nexperiment = prediction\nseed = 7\n[network]\nblocks = 4\nblock_size = 8\n"
                               "[task]\nkind = sine\nperiod = 40\n[prediction]\nsteps = 80\n";
    REQUIRE(run_cli("validate-config " + cfg_path.string()) == 0);

    const fs::path bad_path = dir / "bad.cfg";
    std::ofstream(bad_path) << "[task]\nknd = sine\n";
    CHECK(run_cli("validate-config " + bad_path.string()) == 1);

    CHECK(run_cli("run --config " + cfg_path.string() + " --out " + (dir / "r1").string()) == 0);
    CHECK(run_cli("run --config " + cfg_path.string() + " --out " + (dir / "r2").string()) == 0);
    CHECK(slurp((dir / "r1/metrics.jsonl").string()) == slurp((dir / "r2/metrics.jsonl").string()));
    CHECK(!slurp((dir / "r1/config.resolved").string()).empty());

    // seed override must change the metrics
    CHECK(run_cli("run --config " + cfg_path.string() + " --seed 8 --out " + (dir / "r3").string()) == 0);
    CHECK(slurp((dir / "r1/metrics.jsonl").string()) != slurp((dir / "r3/metrics.jsonl").string()));

    // plot renders one svg per metric
    CHECK(run_cli("plot " + (dir / "r1/metrics.jsonl").string() + " --out " + (dir / "charts").string()) == 0);
    CHECK(fs::exists(dir / "charts/prediction_mse.svg"));
}
