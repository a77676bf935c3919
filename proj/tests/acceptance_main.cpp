// Acceptance suite: runs every criterion at its pinned threshold and prints
// one PASS/FAIL line per criterion. Exit code 0 only if all pass.

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "trophic/config.hpp"
#include "trophic/experiments.hpp"

int main(int argc, char** argv) {
    std::string config_path;
    std::string out_dir = (std::filesystem::temp_directory_path() / "trophic_acceptance").string();
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) config_path = argv[++i];
        else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) out_dir = argv[++i];
    }

    trophic::Config cfg;
    if (!config_path.empty()) {
        cfg = trophic::Config::from_file(config_path);
        cfg.validate_keys(trophic::config_schema());
    } else {
        const std::filesystem::path bundled =
            std::filesystem::path(__FILE__).parent_path().parent_path() / "configs" / "desk.cfg";
        if (std::filesystem::exists(bundled)) {
            cfg = trophic::Config::from_file(bundled.string());
            cfg.validate_keys(trophic::config_schema());
        }
    }

    const trophic::experiments::AcceptanceReport report =
        trophic::experiments::run_acceptance_suite(cfg, out_dir);
    std::printf("%zu/%zu criteria passed\n",
                static_cast<std::size_t>(std::count_if(report.items.begin(), report.items.end(),
                                                       [](const auto& i) { return i.pass; })),
                report.items.size());
    return report.all_pass ? 0 : 2;
}
