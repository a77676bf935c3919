#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trophic/config.hpp"
#include "trophic/metrics.hpp"
#include "trophic/oracle.hpp"
#include "trophic/trainer.hpp"

namespace trophic::experiments {

struct ExactnessResult {
    std::vector<double> pearson_per_seed;
    std::vector<double> spearman_per_seed;
    double pearson_mean = 0.0;
    double spearman_mean = 0.0;
    double shuffled_pearson_abs = 0.0; // permutation control, last seed
};
ExactnessResult run_exactness(const Config& cfg, MetricsSink* sink);

struct AlignmentResult {
    std::vector<double> cosine;      // per step
    std::vector<double> mse;         // per step
    double cos_first_quarter = 0.0;
    double cos_last_quarter = 0.0;
    double initial_mse = 0.0;
    std::optional<std::uint64_t> step_mse_low;  // first step with EWMA MSE <= 20% initial
    std::optional<std::uint64_t> step_cos_high; // first step with cosine > 0.8
};
AlignmentResult run_alignment(const Config& cfg, MetricsSink* sink);

struct TemporalResult {
    oracle::CreditComparison diagonal_vs_exact;
    oracle::CreditComparison ema_only_vs_exact;
};
TemporalResult run_temporal(const Config& cfg, MetricsSink* sink);

struct AblationResult {
    // order: original, no_nlms, no_arch_scaling, neither
    std::vector<std::string> condition;
    std::vector<double> initial_mse;
    std::vector<double> final_mse;
    std::vector<double> reduction; // 1 - final/initial, non-finite final -> 0
};
AblationResult run_nlms_ablation(const Config& cfg, MetricsSink* sink);

struct ContinualResult {
    std::vector<double> baseline;      // per seed
    std::vector<double> zero_shot;     // per seed
    std::vector<double> post_relearn;  // per seed
    double zero_shot_ratio_median = 0.0;
    double post_relearn_ratio_median = 0.0;
    double transfer_improvement = 0.0;  // 1 - pretrained/naive initial-B error
    double switching_drift = 0.0;       // last-vs-first A-phase error ratio
    double relearn_speed_ratio = 0.0;   // naive / experienced reconvergence steps
};
ContinualResult run_continual(const Config& cfg, MetricsSink* sink);

struct DamageResult {
    std::vector<double> baseline;
    std::vector<double> immediate; // right after ablation
    std::vector<double> recovered;
    double immediate_ratio_median = 0.0;
    double recovered_ratio_median = 0.0;
};
DamageResult run_damage_recovery(const Config& cfg, MetricsSink* sink);

struct CriticalityResult {
    std::vector<std::pair<std::uint64_t, double>> rho; // (step, spectral radius)
    double final_third_mean = 0.0;
};
CriticalityResult run_criticality(const Config& cfg, MetricsSink* sink);

struct MemoryResult {
    std::vector<double> r2_per_delay; // index d-1 holds delay d
};
MemoryResult run_memory_capacity(const Config& cfg, MetricsSink* sink);

/// C(B, K) * (c * ell)^K
double compositional_capacity(int blocks, int k, int ell, double c = 0.15);

struct RlResult {
    std::vector<double> first_quartile_ma; // per seed
    std::vector<double> last_quartile_ma;  // per seed
    std::vector<double> random_mean;       // per seed
    std::vector<double> random_std;        // per seed
    double first_quartile_ma_median = 0.0;
    double last_quartile_ma_median = 0.0;
    double random_mean_median = 0.0;
    double random_std_median = 0.0;
    int landings_total = 0;
};
RlResult run_rl(const Config& cfg, MetricsSink* sink);

/// Generic online prediction run: task from config, optional mid-run
/// checkpoint, per-step metrics. The determinism and replay contracts are
/// exercised against this experiment.
struct PredictionResult {
    double final_ewma_mse = 0.0;
    double nrmse = 0.0;
};
PredictionResult run_prediction(const Config& cfg, MetricsSink* sink, const std::string& out_dir);

/// Resume a prediction run from a checkpoint; emits the remaining metric
/// records exactly as the original run would have.
PredictionResult replay_prediction(const Config& cfg, MetricsSink* sink, const std::string& checkpoint_path);

struct AcceptanceItem {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};
struct AcceptanceReport {
    std::vector<AcceptanceItem> items;
    bool all_pass = false;
};
/// Runs every acceptance criterion at its pinned threshold, printing one
/// PASS/FAIL line per criterion to stdout.
AcceptanceReport run_acceptance_suite(const Config& cfg, const std::string& out_dir);

/// Dispatch by run.experiment; writes metrics and the resolved config into
/// out_dir. Returns a process exit code (0 ok, 2 failed acceptance).
int run_named_experiment(const Config& cfg, const std::string& out_dir);

double median(std::vector<double> v);

} // namespace trophic::experiments
