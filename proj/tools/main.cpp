#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trophic/config.hpp"
#include "trophic/experiments.hpp"
#include "trophic/metrics.hpp"

namespace fs = std::filesystem;
using trophic::Config;

namespace {

Config load_config(const std::string& path, const std::vector<std::string>& overrides,
                   std::optional<std::uint64_t> seed) {
    Config cfg = Config::from_file(path);
    for (const std::string& o : overrides) cfg.apply_override(o);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    cfg.validate_keys(trophic::config_schema());
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-sparse recurrent network lab: hierarchical local credit assignment"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", checkpoint_path, metrics_path, plot_out;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "configuration file");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("-D,--set", overrides, "override as section.key=value");
        cmd->add_option("--seed", seed, "seed override");
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config");
    add_common(run, true);

    CLI::App* validate = app.add_subcommand("validate-config", "check a config against the schema");
    validate->add_option("config", config_path, "configuration file")->required();

    CLI::App* replay = app.add_subcommand("replay", "resume a prediction run from a checkpoint");
    add_common(replay, true);
    replay->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    CLI::App* suite = app.add_subcommand("suite", "run the full acceptance suite");
    add_common(suite, true);

    CLI::App* plot = app.add_subcommand("plot", "render metric series to SVG line charts");
    plot->add_option("metrics", metrics_path, "metrics.jsonl file")->required();
    plot->add_option("--out", plot_out, "output directory (defaults beside the input)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            Config cfg = Config::from_file(config_path);
            cfg.validate_keys(trophic::config_schema());
            std::printf("ok: %zu keys, hash %s\n", cfg.values().size(), cfg.hash_hex().c_str());
            return 0;
        }
        if (plot->parsed()) {
            const auto records = trophic::read_metric_file(metrics_path);
            std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> series;
            for (const auto& r : records) series[r.metric].emplace_back(r.step, r.value);
            const std::string dir = plot_out.empty() ? fs::path(metrics_path).parent_path().string() : plot_out;
            if (!dir.empty()) fs::create_directories(dir);
            for (auto& [name, s] : series) {
                std::string fname = name;
                std::replace(fname.begin(), fname.end(), '/', '_');
                trophic::write_svg_line_chart((dir.empty() ? "." : dir) + "/" + fname + ".svg", name, s);
            }
            std::printf("wrote %zu charts\n", series.size());
            return 0;
        }

        Config cfg = load_config(config_path, overrides, seed);
        if (replay->parsed()) {
            fs::create_directories(out_dir);
            std::ofstream resolved(out_dir + "/config.resolved");
            resolved << cfg.canonical();
            trophic::MetricsSink sink(out_dir + "/metrics.jsonl",
                                      cfg.get_string("run.experiment", "prediction"), cfg.hash_hex());
            trophic::experiments::replay_prediction(cfg, &sink, checkpoint_path);
            return 0;
        }
        if (suite->parsed()) cfg.set("run.experiment", "suite");
        return trophic::experiments::run_named_experiment(cfg, out_dir);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
