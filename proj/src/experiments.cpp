#include "trophic/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "trophic/rl.hpp"
#include "trophic/rng.hpp"
#include "trophic/tasks.hpp"
#include "trophic/testing/finite_diff.hpp"

namespace trophic::experiments {

namespace fs = std::filesystem;

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = lo; i < hi && i < v.size(); ++i) {
        s += v[i];
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

tasks::TaskStream stream_from_config(const Config& cfg) {
    tasks::TaskStream ts;
    ts.kind = cfg.get_string("task.kind", "mackey_glass");
    ts.period = cfg.get_double("task.period", 50.0);
    ts.sigma_step = cfg.get_double("task.sigma_step", 0.2);
    ts.mg.tau = cfg.get_double("task.mg_tau", 17.0);
    ts.mg.warmup = cfg.get_int("task.mg_warmup", 500);
    ts.seed = cfg.get_u64("task.seed", 7);
    return ts;
}

// One-step-ahead batch feeder; replica r reads the stream at a fixed phase
// offset so a batch covers distinct task phases.
struct Feeder {
    std::vector<double> s;
    std::vector<int> offsets;
    int cursor = 0;

    Feeder(const tasks::TaskStream& ts, int steps, int replicas) {
        offsets.resize(replicas);
        int stride = 31;
        if (ts.kind == "sine" || ts.kind == "square")
            stride = std::max(1, static_cast<int>(ts.period) / std::max(1, replicas));
        for (int r = 0; r < replicas; ++r) offsets[r] = r * stride;
        s = ts.generate(steps + offsets.back() + 2);
    }

    void next(std::vector<std::vector<double>>& ub, std::vector<std::vector<double>>& yb) {
        const int R = static_cast<int>(offsets.size());
        ub.assign(R, std::vector<double>(1));
        yb.assign(R, std::vector<double>(1));
        for (int r = 0; r < R; ++r) {
            ub[r][0] = s[cursor + offsets[r]];
            yb[r][0] = s[cursor + offsets[r] + 1];
        }
        ++cursor;
    }
};

Trainer make_trainer(const Config& cfg, std::uint64_t seed, int d_in, int d_out) {
    NetworkConfig ncfg = NetworkConfig::from_config(cfg, d_in, d_out);
    ncfg.seed = seed;
    TrainerOptions opt = TrainerOptions::from_config(cfg);
    return Trainer(Network::build(ncfg), opt);
}

double train_steps(Trainer& tr, Feeder& f, int steps, bool learn = true) {
    std::vector<std::vector<double>> ub, yb;
    double last = 0.0;
    for (int t = 0; t < steps; ++t) {
        f.next(ub, yb);
        last = tr.step(ub, yb, learn).mse;
    }
    return last;
}

// Frozen-weights error: washout to entrain the state, then mean MSE.
double frozen_eval(Trainer& tr, Feeder& f, int washout, int window) {
    std::vector<std::vector<double>> ub, yb;
    for (int t = 0; t < washout; ++t) {
        f.next(ub, yb);
        tr.step(ub, yb, false);
    }
    double sum = 0.0;
    for (int t = 0; t < window; ++t) {
        f.next(ub, yb);
        sum += tr.step(ub, yb, false).mse;
    }
    return sum / std::max(1, window);
}

oracle::Trajectory collect_trajectory(Trainer& tr, Feeder& f, int steps) {
    std::vector<std::vector<double>> us, ys;
    std::vector<std::vector<double>> ub, yb;
    for (int t = 0; t < steps; ++t) {
        f.next(ub, yb);
        us.push_back(ub[0]);
        ys.push_back(yb[0]);
    }
    return tr.collect(us, ys);
}

Config with_override(Config cfg, const std::string& key, const std::string& value) {
    cfg.set(key, value);
    return cfg;
}

} // namespace

ExactnessResult run_exactness(const Config& cfg, MetricsSink* sink) {
    const int seeds = cfg.get_int("exactness.seeds", 5);
    const int train = cfg.get_int("exactness.train_steps", 2000);
    const int settle = cfg.get_int("exactness.settle_steps", 1500);
    const int collect = cfg.get_int("exactness.collect_steps", 100);
    const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);

    ExactnessResult res;
    for (int s = 0; s < seeds; ++s) {
        Config c = with_override(cfg, "train.replicas", "1");
        Trainer tr = make_trainer(c, base_seed + static_cast<std::uint64_t>(s), 1, 1);
        Feeder f(stream_from_config(c), train + settle + collect + 4, 1);
        train_steps(tr, f, train);
        // settle phase: topology frozen, synaptic learning continues, so the
        // readout and feedback pathways equilibrate to the final structure
        tr.set_structural(false);
        train_steps(tr, f, settle);

        const oracle::Trajectory traj = collect_trajectory(tr, f, collect);
        const Network& net = tr.net();
        std::vector<double> h = oracle::local_heuristic(traj, net.layout);
        std::vector<double> g =
            oracle::bptt_block_gradients(traj, net.w, net.w_in, net.heads.bias, net.heads.readout);
        const oracle::CreditComparison cc = oracle::compare(h, g, 0.1);
        res.pearson_per_seed.push_back(cc.pearson.value_or(0.0));
        res.spearman_per_seed.push_back(cc.spearman.value_or(0.0));
        if (sink) {
            sink->record(s, "exactness/pearson", res.pearson_per_seed.back());
            sink->record(s, "exactness/spearman", res.spearman_per_seed.back());
        }

        if (s == seeds - 1) {
            // permutation control: shuffling the oracle map must destroy the fit
            std::vector<double> shuffled = g;
            for (std::size_t i = shuffled.size(); i > 1; --i) {
                const std::size_t j = rng::mix3(base_seed, 0x5f1eull, i) % i;
                std::swap(shuffled[i - 1], shuffled[j]);
            }
            res.shuffled_pearson_abs = std::abs(oracle::pearson(h, shuffled));
            if (sink) sink->record(s, "exactness/shuffled_pearson_abs", res.shuffled_pearson_abs);
        }
    }
    res.pearson_mean = mean_of(res.pearson_per_seed, 0, res.pearson_per_seed.size());
    res.spearman_mean = mean_of(res.spearman_per_seed, 0, res.spearman_per_seed.size());
    return res;
}

AlignmentResult run_alignment(const Config& cfg, MetricsSink* sink) {
    const int steps = cfg.get_int("alignment.steps", 20000);
    // the slow-alignment protocol watches the feedback pathway converge well
    // after the readout has learned, so it runs at its own (smaller) eta_fb
    Config c = cfg;
    c.set("rates.eta_fb", std::to_string(cfg.get_double("alignment.eta_fb", 0.005)));
    Trainer tr = make_trainer(c, cfg.get_u64("run.seed", 1), 1, 1);
    Feeder f(stream_from_config(c), steps + 4, tr.options().replicas);

    AlignmentResult res;
    // untrained baseline: the readout starts at zero, so its error is E[y^2]
    for (int t = 0; t < steps; ++t) res.initial_mse += f.s[t + 1] * f.s[t + 1] / steps;
    std::vector<std::vector<double>> ub, yb;
    for (int t = 0; t < steps; ++t) {
        f.next(ub, yb);
        const StepOutcome out = tr.step(ub, yb, true);
        res.mse.push_back(out.mse);
        res.cosine.push_back(out.cosine_alignment);
        if (!res.step_mse_low && t >= 50 && tr.ewma_mse() <= 0.2 * res.initial_mse)
            res.step_mse_low = static_cast<std::uint64_t>(t);
        if (!res.step_cos_high && std::isfinite(out.cosine_alignment) && out.cosine_alignment > 0.8)
            res.step_cos_high = static_cast<std::uint64_t>(t);
        if (sink && t % 50 == 0) {
            if (std::isfinite(out.cosine_alignment)) sink->record(t, "alignment/cosine", out.cosine_alignment);
            sink->record(t, "alignment/mse_ewma", tr.ewma_mse());
        }
    }
    const std::size_t q = res.cosine.size() / 4;
    std::vector<double> clean;
    clean.reserve(res.cosine.size());
    for (double c : res.cosine) clean.push_back(std::isfinite(c) ? c : 0.0);
    res.cos_first_quarter = mean_of(clean, 0, q);
    res.cos_last_quarter = mean_of(clean, clean.size() - q, clean.size());
    return res;
}

TemporalResult run_temporal(const Config& cfg, MetricsSink* sink) {
    const int train = cfg.get_int("temporal.train_steps", 1500);
    const int collect = cfg.get_int("temporal.collect_steps", 24);
    Config c = with_override(cfg, "train.replicas", "1");
    Trainer tr = make_trainer(c, cfg.get_u64("run.seed", 1), 1, 1);
    Feeder f(stream_from_config(c), train + collect + 4, 1);
    train_steps(tr, f, train);

    const oracle::Trajectory traj = collect_trajectory(tr, f, collect);
    const Network& net = tr.net();
    const std::vector<double> exact =
        oracle::forward_eprop_exact(traj, net.w, net.w_in, net.heads.bias, net.heads.readout);
    const std::vector<double> diag = oracle::diagonal_approx(traj, net.w, net.heads.readout, true);
    const std::vector<double> ema = oracle::diagonal_approx(traj, net.w, net.heads.readout, false);

    TemporalResult res;
    res.diagonal_vs_exact = oracle::compare(diag, exact, 0.1);
    res.ema_only_vs_exact = oracle::compare(ema, exact, 0.1);
    if (sink) {
        sink->record(0, "temporal/diag_pearson", res.diagonal_vs_exact.pearson.value_or(0.0));
        sink->record(0, "temporal/diag_auroc", res.diagonal_vs_exact.auroc.value_or(0.0));
        sink->record(0, "temporal/diag_precision_at_k", res.diagonal_vs_exact.precision_at_k.value_or(0.0));
        sink->record(0, "temporal/ema_auroc", res.ema_only_vs_exact.auroc.value_or(0.0));
    }
    return res;
}

AblationResult run_nlms_ablation(const Config& cfg, MetricsSink* sink) {
    const int steps = cfg.get_int("ablation.steps", 3000);
    const std::uint64_t seed = cfg.get_u64("run.seed", 1);

    AblationResult res;
    const std::vector<std::pair<std::string, std::pair<bool, bool>>> conditions = {
        {"original", {true, true}},
        {"no_nlms", {false, true}},
        {"no_arch_scaling", {true, false}},
        {"neither", {false, false}},
    };
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
        Config c = cfg;
        c.set("rates.nlms", conditions[ci].second.first ? "true" : "false");
        c.set("rates.norm_projection", conditions[ci].second.second ? "true" : "false");
        Trainer tr = make_trainer(c, seed, 1, 1);
        Feeder f(stream_from_config(c), steps + 4, tr.options().replicas);

        // zero-prediction baseline of the same horizon
        double initial = 0.0;
        for (int t = 0; t < steps; ++t) initial += f.s[t + 1] * f.s[t + 1];
        initial /= steps;

        std::vector<double> mses;
        bool diverged = false;
        std::vector<std::vector<double>> ub, yb;
        for (int t = 0; t < steps; ++t) {
            f.next(ub, yb);
            try {
                mses.push_back(tr.step(ub, yb, true).mse);
            } catch (const std::exception&) {
                diverged = true;
                break;
            }
        }
        const std::size_t tail = std::min<std::size_t>(500, mses.size());
        double fin = diverged || mses.empty()
                         ? std::numeric_limits<double>::infinity()
                         : mean_of(mses, mses.size() - tail, mses.size());
        double reduction = std::isfinite(fin) ? 1.0 - fin / initial : 0.0;
        if (reduction < 0.0) reduction = 0.0;

        res.condition.push_back(conditions[ci].first);
        res.initial_mse.push_back(initial);
        res.final_mse.push_back(fin);
        res.reduction.push_back(reduction);
        if (sink) sink->record(ci, "ablation/reduction_" + conditions[ci].first, reduction);
    }
    return res;
}

ContinualResult run_continual(const Config& base_cfg, MetricsSink* sink) {
    // the single-step relearning probe needs the Hebbian imprint gentle:
    // at saturated error gates, one step at the shared eta_h rewrites whole
    // blocks (trace products carry the (1-a_f)/(1-a_e) ~ 9.6 gain squared)
    Config cfg = base_cfg;
    cfg.set("rates.eta_h", std::to_string(base_cfg.get_double("continual.eta_h", 0.05)));
    const int seeds = cfg.get_int("continual.seeds", 5);
    const int steps_a = cfg.get_int("continual.steps_a", 3000);
    const int steps_b = cfg.get_int("continual.steps_b", 3000);
    const int window = cfg.get_int("continual.eval_window", 100);
    const int washout = cfg.get_int("train.washout", 100);
    const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);

    // task A comes from the config's [task] section only when periodic;
    // retention wants a pair with real interference, so A defaults to the
    // slow sine and B to the square wave of the distribution-shift protocol
    tasks::TaskStream task_a;
    task_a.kind = "sine";
    task_a.period = cfg.get_double("task.period", 50.0);
    tasks::TaskStream task_b;
    task_b.kind = "square";
    task_b.period = 20.0;
    tasks::TaskStream task_related; // for the transfer probe
    task_related.kind = "sine";
    task_related.period = task_a.period * 0.8;

    ContinualResult res;
    const int horizon = steps_a + steps_b + 8 * (washout + window) + 16;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
        Trainer tr = make_trainer(cfg, seed, 1, 1);
        const int R = tr.options().replicas;
        const int settle = cfg.get_int("continual.settle_steps", 500);

        Feeder fa(task_a, horizon, R);
        Feeder fb(task_b, horizon, R);

        // topology settles before each measurement: structural events land on
        // a fixed period, and an event on the last training step would leave
        // the readout facing a rewired network it has never seen
        train_steps(tr, fa, steps_a - settle);
        tr.set_structural(false);
        train_steps(tr, fa, settle);
        const double baseline = frozen_eval(tr, fa, washout, window);

        // transfer probe: first-window online error on a related task,
        // pre-trained vs naive (probe copies leave the protocol untouched)
        if (s == 0) {
            std::ostringstream buf;
            tr.save(buf);
            std::istringstream in(buf.str());
            Trainer probe = Trainer::load(in, tr.options());
            Feeder fr(task_related, window + 4, R);
            std::vector<std::vector<double>> ub, yb;
            double pre = 0.0;
            for (int t = 0; t < window; ++t) {
                fr.next(ub, yb);
                pre += probe.step(ub, yb, true).mse;
            }
            Trainer naive = make_trainer(cfg, seed, 1, 1);
            Feeder fr2(task_related, window + 4, R);
            double nai = 0.0;
            for (int t = 0; t < window; ++t) {
                fr2.next(ub, yb);
                nai += naive.step(ub, yb, true).mse;
            }
            res.transfer_improvement = 1.0 - pre / std::max(nai, 1e-12);
        }

        tr.set_structural(true);
        train_steps(tr, fb, steps_b - settle);
        tr.set_structural(false);
        train_steps(tr, fb, settle);
        const double zero_shot = frozen_eval(tr, fa, washout, window);

        // one relearning step on task A, then a frozen re-evaluation
        std::vector<std::vector<double>> ub, yb;
        fa.next(ub, yb);
        tr.step(ub, yb, true);
        const double post = frozen_eval(tr, fa, 0, window);

        res.baseline.push_back(baseline);
        res.zero_shot.push_back(zero_shot);
        res.post_relearn.push_back(post);
        if (sink) {
            sink->record(s, "continual/baseline", baseline);
            sink->record(s, "continual/zero_shot", zero_shot);
            sink->record(s, "continual/post_relearn", post);
        }
    }
    std::vector<double> zr, pr;
    for (std::size_t i = 0; i < res.baseline.size(); ++i) {
        zr.push_back(res.zero_shot[i] / std::max(res.baseline[i], 1e-12));
        pr.push_back(res.post_relearn[i] / std::max(res.baseline[i], 1e-12));
    }
    res.zero_shot_ratio_median = median(zr);
    res.post_relearn_ratio_median = median(pr);

    // rapid switching: alternate the tasks, compare first and last A phases
    {
        const int period = cfg.get_int("continual.switch_period", 200);
        const int count = cfg.get_int("continual.switch_count", 10);
        Trainer tr = make_trainer(cfg, base_seed, 1, 1);
        const int R = tr.options().replicas;
        Feeder fa(task_a, period * count + 8, R);
        Feeder fb(task_b, period * count + 8, R);
        double first_a = -1.0, last_a = 0.0;
        std::vector<std::vector<double>> ub, yb;
        for (int phase = 0; phase < count; ++phase) {
            Feeder& f = phase % 2 == 0 ? fa : fb;
            double sum = 0.0;
            for (int t = 0; t < period; ++t) {
                f.next(ub, yb);
                sum += tr.step(ub, yb, true).mse;
            }
            if (phase % 2 == 0) {
                const double m = sum / period;
                if (first_a < 0.0) first_a = m;
                last_a = m;
                if (sink) sink->record(phase, "continual/switch_phase_mse", m);
            }
        }
        res.switching_drift = last_a / std::max(first_a, 1e-12) - 1.0;
    }

    // relearning acceleration: steps for the EWMA to come back under
    // 1.5x baseline, experienced vs naive (logged, not gated)
    {
        const double target = 1.5 * std::max(res.baseline[0], 1e-9);
        auto steps_to_target = [&](Trainer& tr, Feeder& f, int cap) {
            std::vector<std::vector<double>> ub, yb;
            for (int t = 0; t < cap; ++t) {
                f.next(ub, yb);
                tr.step(ub, yb, true);
                if (tr.ewma_mse() <= target) return t + 1;
            }
            return cap;
        };
        Trainer exp_tr = make_trainer(cfg, base_seed, 1, 1);
        const int R = exp_tr.options().replicas;
        Feeder fa(task_a, 2 * (steps_a + steps_b) + 16, R);
        Feeder fb(task_b, steps_b + 16, R);
        train_steps(exp_tr, fa, steps_a);
        train_steps(exp_tr, fb, steps_b);
        const int exp_steps = steps_to_target(exp_tr, fa, steps_a);
        Trainer naive_tr = make_trainer(cfg, base_seed + 1000, 1, 1);
        Feeder fa2(task_a, steps_a + 16, R);
        const int naive_steps = steps_to_target(naive_tr, fa2, steps_a);
        res.relearn_speed_ratio = static_cast<double>(naive_steps) / std::max(1, exp_steps);
        if (sink) sink->record(0, "continual/relearn_speed_ratio", res.relearn_speed_ratio);
    }
    return res;
}

DamageResult run_damage_recovery(const Config& cfg, MetricsSink* sink) {
    const int seeds = cfg.get_int("damage.seeds", 5);
    const int converge = cfg.get_int("damage.converge_steps", 4000);
    const int recover = cfg.get_int("damage.recover_steps", 12000);
    const double fraction = cfg.get_double("damage.ablate_fraction", 0.75);
    const int window = cfg.get_int("continual.eval_window", 100);
    const int washout = cfg.get_int("train.washout", 100);
    const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);

    DamageResult res;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
        Trainer tr = make_trainer(cfg, seed, 1, 1);
        Feeder f(stream_from_config(cfg), converge + recover + 6 * (washout + window) + 16,
                 tr.options().replicas);

        train_steps(tr, f, converge);
        const double baseline = frozen_eval(tr, f, washout, window);

        // seeded ablation of a fixed fraction of the occupied blocks
        auto blocks = tr.net().w.occupied_blocks();
        std::sort(blocks.begin(), blocks.end(), [&](auto a, auto b) {
            return rng::mix3(seed, 0xab1a7eull, static_cast<std::uint64_t>(a.first) * 1024 + a.second) <
                   rng::mix3(seed, 0xab1a7eull, static_cast<std::uint64_t>(b.first) * 1024 + b.second);
        });
        const std::size_t kill = static_cast<std::size_t>(fraction * static_cast<double>(blocks.size()));
        for (std::size_t k = 0; k < kill; ++k) tr.net().w.remove_block(blocks[k].first, blocks[k].second);

        const double immediate = frozen_eval(tr, f, washout, window);
        train_steps(tr, f, recover);
        const double recovered = frozen_eval(tr, f, washout, window);

        res.baseline.push_back(baseline);
        res.immediate.push_back(immediate);
        res.recovered.push_back(recovered);
        if (sink) {
            sink->record(s, "damage/baseline", baseline);
            sink->record(s, "damage/immediate", immediate);
            sink->record(s, "damage/recovered", recovered);
        }
    }
    std::vector<double> ir, rr;
    for (std::size_t i = 0; i < res.baseline.size(); ++i) {
        ir.push_back(res.immediate[i] / std::max(res.baseline[i], 1e-12));
        rr.push_back(res.recovered[i] / std::max(res.baseline[i], 1e-12));
    }
    res.immediate_ratio_median = median(ir);
    res.recovered_ratio_median = median(rr);
    return res;
}

CriticalityResult run_criticality(const Config& cfg, MetricsSink* sink) {
    const int steps = cfg.get_int("criticality.steps", 9000);
    const int every = cfg.get_int("criticality.measure_every", 100);
    Config c = with_override(cfg, "train.replicas", "1");
    Trainer tr = make_trainer(c, cfg.get_u64("run.seed", 1), 1, 1);
    Feeder f(stream_from_config(c), steps + 4, 1);

    CriticalityResult res;
    std::vector<std::vector<double>> ub, yb;
    for (int t = 0; t < steps; ++t) {
        f.next(ub, yb);
        tr.step(ub, yb, true);
        if ((t + 1) % every == 0) {
            const Network& net = tr.net();
            const SpectralRadiusResult sr = spectral_radius(net.w, tr.states()[0].x, net.w_in, ub[0],
                                                            net.heads.bias, net.dyn, 300);
            res.rho.emplace_back(static_cast<std::uint64_t>(t + 1), sr.value);
            if (sink) sink->record(t + 1, "criticality/rho", sr.value);
        }
    }
    const std::size_t third = res.rho.size() / 3;
    double sum = 0.0;
    for (std::size_t i = res.rho.size() - third; i < res.rho.size(); ++i) sum += res.rho[i].second;
    res.final_third_mean = third ? sum / static_cast<double>(third) : 0.0;
    return res;
}

MemoryResult run_memory_capacity(const Config& cfg, MetricsSink* sink) {
    const int steps = cfg.get_int("memory.steps", 16000);
    const int max_delay = cfg.get_int("memory.max_delay", 8);
    const int window = cfg.get_int("memory.eval_window", 1000);
    const double sigma = cfg.get_double("memory.sigma_step", 0.2);
    const std::uint64_t seed = cfg.get_u64("run.seed", 1);

    // capacity is a property of the fixed reservoir plus its readout, so the
    // recall protocol trains the readout alone (echo-state memory-capacity
    // methodology); the full plastic system is exercised elsewhere
    Config c = with_override(cfg, "network.w_in_scale",
                             std::to_string(cfg.get_double("memory.w_in_scale", 2.5)));
    NetworkConfig ncfg = NetworkConfig::from_config(c, 1, max_delay);
    ncfg.seed = seed;
    TrainerOptions mopt = TrainerOptions::from_config(c);
    mopt.learn_recurrent = false;
    mopt.learn_bias = false;
    mopt.structural = false;
    Trainer tr(Network::build(ncfg), mopt);
    const int R = tr.options().replicas;
    const std::vector<double> s =
        tasks::random_walk(sigma, steps + window + max_delay + 37 * R + 4, seed ^ 0x3a5ull);

    // replica r reads the walk at a fixed offset; targets are the delayed
    // inputs of its own stream
    auto feed = [&](int t, std::vector<std::vector<double>>& ub, std::vector<std::vector<double>>& yb) {
        for (int r = 0; r < R; ++r) {
            const int base = t + max_delay + 37 * r;
            ub[r][0] = s[base];
            for (int d = 1; d <= max_delay; ++d) yb[r][d - 1] = s[base - d];
        }
    };

    std::vector<std::vector<double>> ub(R, std::vector<double>(1));
    std::vector<std::vector<double>> yb(R, std::vector<double>(max_delay));
    int t = 0;
    for (; t < steps; ++t) {
        feed(t, ub, yb);
        tr.step(ub, yb, true);
    }

    // frozen scoring window on replica 0
    std::vector<double> se(max_delay, 0.0), sy(max_delay, 0.0), syy(max_delay, 0.0);
    for (int k = 0; k < window; ++k) {
        feed(t + k, ub, yb);
        tr.step(ub, yb, false);
        const std::vector<double> y_hat = readout_predict(tr.net().heads.readout, tr.states()[0].x);
        for (int d = 0; d < max_delay; ++d) {
            const double err = y_hat[d] - yb[0][d];
            se[d] += err * err;
            sy[d] += yb[0][d];
            syy[d] += yb[0][d] * yb[0][d];
        }
    }
    MemoryResult res;
    for (int d = 0; d < max_delay; ++d) {
        const double var = syy[d] / window - (sy[d] / window) * (sy[d] / window);
        const double r2 = var > 0.0 ? 1.0 - (se[d] / window) / var : 0.0;
        res.r2_per_delay.push_back(r2);
        if (sink) sink->record(d + 1, "memory/r2", r2);
    }
    return res;
}

double compositional_capacity(int blocks, int k, int ell, double c) {
    if (k < 0 || k > blocks) throw std::invalid_argument("compositional_capacity: k out of range");
    double binom = 1.0;
    for (int i = 0; i < k; ++i) binom = binom * static_cast<double>(blocks - i) / static_cast<double>(i + 1);
    return binom * std::pow(c * static_cast<double>(ell), static_cast<double>(k));
}

namespace {

struct RlEpisodeStats {
    std::vector<double> rewards;
    int landings = 0;
};

RlEpisodeStats rl_random_baseline(const Config& cfg, std::uint64_t seed, int episodes) {
    rl::LanderEnv env;
    RlEpisodeStats stats;
    const int action_repeat = cfg.get_int("rl.action_repeat", 3);
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(rng::mix3(seed, 0xba5eull, static_cast<std::uint64_t>(ep)));
        double total = 0.0;
        bool done = false;
        int t = 0;
        while (!done) {
            const int a = static_cast<int>(rng::mix3(seed, static_cast<std::uint64_t>(ep) * 4096 + t, 0xac7ull) %
                                           rl::kActionCount);
            for (int k = 0; k < action_repeat && !done; ++k) {
                const auto r = env.step(a);
                total += r.reward;
                done = r.done;
                if (r.landed) ++stats.landings;
            }
            ++t;
        }
        stats.rewards.push_back(total);
    }
    return stats;
}

RlEpisodeStats rl_train_single(const Config& cfg, std::uint64_t seed, int episodes, MetricsSink* sink) {
    Config c = with_override(cfg, "train.replicas", "1");
    c.set("network.w_in_scale", std::to_string(cfg.get_double("rl.w_in_scale", 1.0)));
    c.set("network.blocks", std::to_string(cfg.get_int("rl.blocks", cfg.get_int("network.blocks", 8))));
    c.set("network.block_size", std::to_string(cfg.get_int("rl.block_size", cfg.get_int("network.block_size", 32))));
    c.set("dynamics.tau_fast", std::to_string(cfg.get_double("rl.tau_fast", cfg.get_double("dynamics.tau_fast", 10.0))));
    Trainer tr = make_trainer(c, seed, rl::kObsDim, 1);
    if (!cfg.get_bool("rl.plastic", true)) {
        TrainerOptions frozen = tr.options();
        frozen.learn_recurrent = false;
        frozen.learn_bias = false;
        frozen.structural = false;
        tr = Trainer(Network::build([&] {
            NetworkConfig ncfg = NetworkConfig::from_config(c, rl::kObsDim, 1);
            ncfg.seed = seed;
            return ncfg;
        }()), frozen);
    }
    TrainerOptions opt = tr.options();
    DenseMatrix policy(rl::kActionCount, tr.net().layout.neurons());
    const double eta_pi = cfg.get_double("rl.eta_pi", 0.05);
    const double gamma = cfg.get_double("rl.gamma", 0.99);
    const double lambda = cfg.get_double("rl.lambda", 0.95);
    // the policy head keeps its own, tighter cap: bounded logits keep the
    // softmax stochastic, which is the only exploration source here
    PlasticityRates pol_rates = opt.rates;
    pol_rates.norm_cap = cfg.get_double("rl.policy_cap", 1.0);
    const bool reset_state = cfg.get_bool("rl.reset_state", true);
    // learning-side reward scale: raw returns exceed what the capped value
    // head can express; episode logs keep the raw totals
    const double reward_scale = cfg.get_double("rl.reward_scale", 0.05);
    // epsilon floor on the behavior policy keeps rare-but-decisive actions
    // (the landing burn) sampled; anneals over the first half of training
    const double eps_hi = cfg.get_double("rl.explore_start", 0.15);
    const double eps_lo = cfg.get_double("rl.explore_end", 0.03);
    // frame skip: one decision drives several physics steps, so thrust
    // commitments long enough to matter get sampled as single choices
    const int action_repeat = cfg.get_int("rl.action_repeat", 3);

    // fixed scales mapping raw observations into roughly [-1, 1]
    const std::array<double, rl::kObsDim> obs_scale = {1.5, 2.5, 2.0, 2.0, M_PI, 5.0, 1.0, 1.0};
    auto normalize = [&](const std::array<double, rl::kObsDim>& obs) {
        std::vector<double> u(rl::kObsDim);
        for (int i = 0; i < rl::kObsDim; ++i) u[i] = obs[i] / obs_scale[i];
        return u;
    };

    rl::LanderEnv env;
    Network& net = tr.net();
    NetworkState& state = tr.states()[0];
    RlEpisodeStats stats;
    std::uint64_t plastic_step = 0;

    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset(rng::mix3(seed, 0xe57ull, static_cast<std::uint64_t>(ep)));
        if (reset_state) {
            std::fill(state.x.begin(), state.x.end(), 0.0);
            std::fill(state.trc.begin(), state.trc.end(), 0.0);
        }
        trophic::step(state, net.w, net.w_in, normalize(obs), net.heads.bias, net.dyn);

        std::vector<std::vector<double>> xs;     // episode states for the policy pass
        std::vector<int> actions;
        std::vector<double> tds;
        std::vector<char> dones;
        double total = 0.0;
        bool done = false;
        bool landed_episode = false;
        int t = 0;
        while (!done) {
            const std::vector<double> x = state.x;
            std::vector<double> logits(rl::kActionCount, 0.0);
            policy.matvec(x, logits);
            std::vector<double> pi = rl::softmax(logits);
            const double frac = std::min(1.0, 2.0 * ep / std::max(1, episodes));
            const double eps_mix = eps_hi + (eps_lo - eps_hi) * frac;
            for (double& p : pi) p = (1.0 - eps_mix) * p + eps_mix / rl::kActionCount;
            double u = rng::uniform(rng::mix2(seed, 0xac7104ull), static_cast<std::uint64_t>(ep),
                                    static_cast<std::uint64_t>(t));
            int action = 0;
            for (; action < rl::kActionCount - 1; ++action) {
                u -= pi[action];
                if (u <= 0.0) break;
            }

            double reward = 0.0;
            bool landed_now = false;
            rl::LanderEnv::StepResult r;
            for (int k = 0; k < action_repeat && !done; ++k) {
                r = env.step(action);
                reward += r.reward;
                done = r.done;
                if (r.landed) {
                    landed_now = true;
                    ++stats.landings;
                }
            }
            r.reward = reward;
            total += reward;
            landed_episode = landed_episode || landed_now;

            const double v = readout_predict(net.heads.value_readout, x)[0];
            trophic::step(state, net.w, net.w_in, normalize(r.obs), net.heads.bias, net.dyn);
            const double v_next = readout_predict(net.heads.value_readout, state.x)[0];
            const double rpe = rl::td_error(reward_scale * r.reward, gamma, v, v_next, done);

            // value head via the shared NLMS machinery (delta = -rpe)
            const std::vector<double> delta_v{-rpe};
            const DenseMatrix dv = nlms_readout_update(net.heads.value_readout, x, delta_v, opt.rates);
            for (std::size_t k = 0; k < dv.v.size(); ++k) net.heads.value_readout.v[k] += dv.v[k];
            if (opt.rates.norm_projection) norm_project(net.heads.value_readout.v, opt.rates.norm_cap);

            // feedback pathway chases the costate target rpe * R_V^T
            const std::vector<double> delta_fb{rpe};
            const DenseMatrix dfb = feedback_align_update(net.heads.feedback, net.heads.value_readout,
                                                          delta_fb, opt.rates);
            for (std::size_t k = 0; k < dfb.v.size(); ++k) net.heads.feedback.v[k] += dfb.v[k];
            if (opt.rates.norm_projection) norm_project(net.heads.feedback.v, opt.rates.norm_cap);

            const std::vector<double> eps = feedback_project(net.heads.feedback, delta_fb);
            const std::vector<double> eg = gated_error(eps, x);
            if (opt.learn_recurrent) {
                BlockSparseMatrix dw = recurrent_plasticity(net.w, x, state.trc, eg, opt.rates);
                apply_block_delta(net.w, dw, opt.rates);
            }
            if (opt.learn_bias) {
                const std::vector<double> db = homeostatic_bias_update(state.a, x, opt.rates);
                for (std::size_t k = 0; k < db.size(); ++k) net.heads.bias[k] += db[k];
            }
            tfm_update(net.tfm, state.trc, eg, net.layout);

            ++plastic_step;
            if (opt.structural && opt.spolicy.structural_period > 0 &&
                plastic_step % static_cast<std::uint64_t>(opt.spolicy.structural_period) == 0)
                structural_step(net.w, net.tfm, 1.0, opt.spolicy,
                                rng::mix2(rng::mix2(seed, 0x57e9ull), plastic_step), plastic_step);

            xs.push_back(x);
            actions.push_back(action);
            tds.push_back(rpe);
            dones.push_back(done ? 1 : 0);
            ++t;
        }

        // end-of-episode policy pass; advantages are scale-normalized so the
        // shaped-reward magnitude does not set the effective learning rate
        std::vector<double> adv = rl::gae_advantages(tds, dones, gamma, lambda);
        double a_sq = 0.0;
        for (double a : adv) a_sq += a * a / adv.size();
        const double a_scale = 1.0 / (std::sqrt(a_sq) + 1e-9);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const DenseMatrix dp =
                rl::policy_update(policy, xs[k], actions[k], adv[k] * a_scale, eta_pi, pol_rates);
            for (std::size_t e = 0; e < dp.v.size(); ++e) policy.v[e] += dp.v[e];
            if (pol_rates.norm_projection) norm_project(policy.v, pol_rates.norm_cap);
        }

        stats.rewards.push_back(total);
        if (sink) {
            double ma = 0.0;
            const std::size_t w = std::min<std::size_t>(100, stats.rewards.size());
            for (std::size_t k = stats.rewards.size() - w; k < stats.rewards.size(); ++k)
                ma += stats.rewards[k] / static_cast<double>(w);
            sink->record_json(ep, "rl/episode",
                              {{"episode", ep}, {"reward", total}, {"steps", t},
                               {"landed", landed_episode}, {"moving_avg_100", ma}});
        }
    }
    return stats;
}

} // namespace

RlResult run_rl(const Config& cfg, MetricsSink* sink) {
    const int seeds = cfg.get_int("rl.seeds", 3);
    const int episodes = cfg.get_int("rl.episodes", 400);
    const int baseline_episodes = cfg.get_int("rl.baseline_episodes", 150);
    const std::uint64_t base_seed = cfg.get_u64("run.seed", 1);

    RlResult res;
    for (int s = 0; s < seeds; ++s) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
        const RlEpisodeStats trained = rl_train_single(cfg, seed, episodes, s == 0 ? sink : nullptr);
        res.landings_total += trained.landings;

        // 100-episode moving average, then first/last quartile means
        const int W = std::min<int>(100, episodes);
        std::vector<double> ma;
        double acc = 0.0;
        for (int i = 0; i < static_cast<int>(trained.rewards.size()); ++i) {
            acc += trained.rewards[i];
            if (i >= W) acc -= trained.rewards[i - W];
            ma.push_back(acc / std::min(i + 1, W));
        }
        const std::size_t q = ma.size() / 4;
        res.first_quartile_ma.push_back(mean_of(ma, 0, q));
        res.last_quartile_ma.push_back(mean_of(ma, ma.size() - q, ma.size()));

        const RlEpisodeStats random = rl_random_baseline(cfg, seed, baseline_episodes);
        const double rmean = mean_of(random.rewards, 0, random.rewards.size());
        double rvar = 0.0;
        for (double r : random.rewards) rvar += (r - rmean) * (r - rmean);
        rvar /= std::max<std::size_t>(1, random.rewards.size() - 1);
        res.random_mean.push_back(rmean);
        res.random_std.push_back(std::sqrt(rvar));
        if (sink) {
            sink->record(s, "rl/first_quartile_ma", res.first_quartile_ma.back());
            sink->record(s, "rl/last_quartile_ma", res.last_quartile_ma.back());
            sink->record(s, "rl/random_mean", rmean);
            sink->record(s, "rl/random_std", res.random_std.back());
        }
    }
    res.first_quartile_ma_median = median(res.first_quartile_ma);
    res.last_quartile_ma_median = median(res.last_quartile_ma);
    res.random_mean_median = median(res.random_mean);
    res.random_std_median = median(res.random_std);
    return res;
}

PredictionResult run_prediction(const Config& cfg, MetricsSink* sink, const std::string& out_dir) {
    const int steps = cfg.get_int("prediction.steps", 2000);
    const int checkpoint_step = cfg.get_int("prediction.checkpoint_step", 0);
    Trainer tr = make_trainer(cfg, cfg.get_u64("run.seed", 1), 1, 1);
    Feeder f(stream_from_config(cfg), steps + 4, tr.options().replicas);

    std::vector<double> preds, targets;
    std::vector<std::vector<double>> ub, yb;
    for (int t = 0; t < steps; ++t) {
        f.next(ub, yb);
        const StepOutcome out = tr.step(ub, yb, true);
        if (sink) {
            sink->record(t, "prediction/mse", out.mse);
            sink->record(t, "prediction/mse_ewma", tr.ewma_mse());
            if (out.structural) {
                const StructuralEvent& ev = *out.structural;
                nlohmann::json removed = nlohmann::json::array(), added = nlohmann::json::array();
                for (auto [i, j] : ev.removed) removed.push_back({i, j});
                for (auto [i, j] : ev.added) added.push_back({i, j});
                sink->record_json(ev.step, "structural_event",
                                  {{"p", ev.percentile}, {"theta", ev.theta}, {"removed", removed},
                                   {"added", added}, {"density", ev.density_after}});
            }
        }
        if (t >= steps / 2) {
            const std::vector<double> y_hat = readout_predict(tr.net().heads.readout, tr.states()[0].x);
            preds.push_back(y_hat[0]);
            targets.push_back(yb[0][0]);
        }
        if (checkpoint_step > 0 && t + 1 == checkpoint_step) {
            const std::string path = cfg.get_string("prediction.checkpoint_path", out_dir + "/checkpoint.bin");
            std::ofstream out_f(path, std::ios::binary);
            tr.save(out_f);
        }
    }
    PredictionResult res;
    res.final_ewma_mse = tr.ewma_mse();
    res.nrmse = tasks::nrmse(preds, targets);
    if (sink) sink->record(steps, "prediction/nrmse", res.nrmse);
    return res;
}

PredictionResult replay_prediction(const Config& cfg, MetricsSink* sink, const std::string& checkpoint_path) {
    const int steps = cfg.get_int("prediction.steps", 2000);
    TrainerOptions opt = TrainerOptions::from_config(cfg);
    std::ifstream in(checkpoint_path, std::ios::binary);
    if (!in) throw std::runtime_error("replay: cannot open checkpoint '" + checkpoint_path + "'");
    Trainer tr = Trainer::load(in, opt);

    Feeder f(stream_from_config(cfg), steps + 4, opt.replicas);
    f.cursor = static_cast<int>(tr.global_step());

    std::vector<double> preds, targets;
    std::vector<std::vector<double>> ub, yb;
    for (int t = f.cursor; t < steps; ++t) {
        f.next(ub, yb);
        const StepOutcome out = tr.step(ub, yb, true);
        if (sink) {
            sink->record(t, "prediction/mse", out.mse);
            sink->record(t, "prediction/mse_ewma", tr.ewma_mse());
        }
        if (t >= steps / 2) {
            const std::vector<double> y_hat = readout_predict(tr.net().heads.readout, tr.states()[0].x);
            preds.push_back(y_hat[0]);
            targets.push_back(yb[0][0]);
        }
    }
    PredictionResult res;
    res.final_ewma_mse = tr.ewma_mse();
    res.nrmse = preds.empty() ? 0.0 : tasks::nrmse(preds, targets);
    return res;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

AcceptanceReport run_acceptance_suite(const Config& base, const std::string& out_dir) {
    AcceptanceReport report;
    fs::create_directories(out_dir);

    auto run_item = [&](int id, const std::string& name, double budget_s, auto&& fn) {
        AcceptanceItem item;
        item.id = id;
        item.name = name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(item);
        } catch (const std::exception& e) {
            item.pass = false;
            item.detail += std::string(" exception: ") + e.what();
        }
        item.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (item.seconds > budget_s) {
            item.pass = false;
            item.detail += " (exceeded " + fmt(budget_s) + "s budget)";
        }
        std::printf("[%s] %2d %-24s %6.1fs  %s\n", item.pass ? "PASS" : "FAIL", item.id,
                    item.name.c_str(), item.seconds, item.detail.c_str());
        std::fflush(stdout);
        report.items.push_back(std::move(item));
    };

    run_item(1, "structural_exactness", 120.0, [&](AcceptanceItem& it) {
        Config cfg = base;
        cfg.set("network.blocks", "8");
        cfg.set("network.block_size", "16");
        MetricsSink sink(out_dir + "/exactness.jsonl", "exactness", cfg.hash_hex());
        const ExactnessResult r = run_exactness(cfg, &sink);
        it.pass = r.pearson_mean >= 0.90 && r.spearman_mean >= 0.85;
        it.detail = "pearson=" + fmt(r.pearson_mean) + " spearman=" + fmt(r.spearman_mean) +
                    " shuffled=" + fmt(r.shuffled_pearson_abs);
    });

    run_item(2, "oracle_correctness", 60.0, [&](AcceptanceItem& it) {
        const testing::OracleChecks r = testing::run_oracle_checks(base.get_u64("run.seed", 1));
        it.pass = r.fd_rel_error <= 1e-5 && r.eprop_rel_error <= 1e-8;
        it.detail = "bptt_vs_fd=" + fmt(r.fd_rel_error) + " eprop_vs_bptt=" + fmt(r.eprop_rel_error);
    });

    run_item(3, "temporal_exactness", 300.0, [&](AcceptanceItem& it) {
        Config cfg = base;
        cfg.set("network.blocks", "8");
        cfg.set("network.block_size", "32");
        MetricsSink sink(out_dir + "/temporal.jsonl", "temporal", cfg.hash_hex());
        const TemporalResult r = run_temporal(cfg, &sink);
        const double p = r.diagonal_vs_exact.pearson.value_or(0.0);
        const double auc = r.diagonal_vs_exact.auroc.value_or(0.0);
        const double ema_auc = r.ema_only_vs_exact.auroc.value_or(1.0);
        it.pass = p >= 0.70 && auc >= 0.85 && ema_auc < auc;
        it.detail = "pearson=" + fmt(p) + " auroc=" + fmt(auc) + " ema_auroc=" + fmt(ema_auc);
    });

    run_item(4, "spatial_alignment", 600.0, [&](AcceptanceItem& it) {
        Config cfg = base;
        cfg.set("network.blocks", "8");
        cfg.set("network.block_size", "32");
        MetricsSink sink(out_dir + "/alignment.jsonl", "alignment", cfg.hash_hex());
        const AlignmentResult r = run_alignment(cfg, &sink);
        const double gain = r.cos_last_quarter - r.cos_first_quarter;
        const bool mse_first =
            r.step_mse_low.has_value() && (!r.step_cos_high || *r.step_mse_low < *r.step_cos_high);
        it.pass = gain >= 0.3 && mse_first;
        it.detail = "cos_gain=" + fmt(gain) + " mse_low_step=" +
                    (r.step_mse_low ? fmt(static_cast<double>(*r.step_mse_low)) : std::string("none")) +
                    " cos_high_step=" +
                    (r.step_cos_high ? fmt(static_cast<double>(*r.step_cos_high)) : std::string("none"));
    });

    run_item(5, "nlms_ablation", 300.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/ablation.jsonl", "ablation", base.hash_hex());
        const AblationResult r = run_nlms_ablation(base, &sink);
        it.pass = r.reduction[0] >= 0.50 && r.reduction[1] <= 0.10 && r.reduction[3] <= 0.10;
        it.detail = "original=" + fmt(r.reduction[0]) + " no_nlms=" + fmt(r.reduction[1]) +
                    " no_arch=" + fmt(r.reduction[2]) + " neither=" + fmt(r.reduction[3]);
    });

    run_item(6, "continual_retention", 600.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/continual.jsonl", "continual", base.hash_hex());
        const ContinualResult r = run_continual(base, &sink);
        it.pass = r.zero_shot_ratio_median > 3.0 && r.post_relearn_ratio_median <= 1.10;
        it.detail = "zero_shot=" + fmt(r.zero_shot_ratio_median) + "x post=" +
                    fmt(r.post_relearn_ratio_median) + "x transfer=" + fmt(r.transfer_improvement);
    });

    run_item(7, "damage_recovery", 900.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/damage.jsonl", "damage", base.hash_hex());
        const DamageResult r = run_damage_recovery(base, &sink);
        it.pass = r.recovered_ratio_median <= 10.0;
        it.detail = "recovered=" + fmt(r.recovered_ratio_median) + "x immediate=" +
                    fmt(r.immediate_ratio_median) + "x";
    });

    run_item(8, "criticality", 600.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/criticality.jsonl", "criticality", base.hash_hex());
        const CriticalityResult r = run_criticality(base, &sink);
        it.pass = r.final_third_mean >= 0.8 && r.final_third_mean <= 1.2;
        it.detail = "rho_final_third=" + fmt(r.final_third_mean);
    });

    run_item(9, "memory_capacity", 600.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/memory.jsonl", "memory", base.hash_hex());
        const MemoryResult r = run_memory_capacity(base, &sink);
        it.pass = r.r2_per_delay.size() >= 6 && r.r2_per_delay[0] >= 0.9 && r.r2_per_delay[5] >= 0.4;
        it.detail = "r2(1)=" + fmt(r.r2_per_delay[0]) + " r2(6)=" + fmt(r.r2_per_delay[5]);
    });

    run_item(10, "capacity_formula", 10.0, [&](AcceptanceItem& it) {
        const double cap = compositional_capacity(64, 4, 32, 0.15);
        it.pass = std::abs(cap / 7.6e8 - 1.0) <= 0.02;
        it.detail = "capacity=" + fmt(cap) + " target=7.6e8";
    });

    run_item(11, "rl_trend", 1800.0, [&](AcceptanceItem& it) {
        MetricsSink sink(out_dir + "/rl.jsonl", "rl", base.hash_hex());
        const RlResult r = run_rl(base, &sink);
        const double bar = r.random_mean_median + 2.0 * r.random_std_median;
        it.pass = r.last_quartile_ma_median > r.first_quartile_ma_median &&
                  r.last_quartile_ma_median >= bar;
        it.detail = "ma_first=" + fmt(r.first_quartile_ma_median) + " ma_last=" +
                    fmt(r.last_quartile_ma_median) + " random=" + fmt(r.random_mean_median) + "+-" +
                    fmt(r.random_std_median) + " landings=" + fmt(static_cast<double>(r.landings_total));
    });

    run_item(12, "determinism", 300.0, [&](AcceptanceItem& it) {
        Config cfg = base;
        cfg.set("prediction.steps", "600");
        auto run_once = [&](const std::string& dir) {
            fs::create_directories(dir);
            MetricsSink sink(dir + "/metrics.jsonl", "prediction", cfg.hash_hex());
            run_prediction(cfg, &sink, dir);
            sink.close();
            std::ifstream in(dir + "/metrics.jsonl", std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = run_once(out_dir + "/det_a");
        const std::string b = run_once(out_dir + "/det_b");
        it.pass = !a.empty() && a == b;
        it.detail = it.pass ? "byte-identical metric files" : "metric files differ";
    });

    report.all_pass = std::all_of(report.items.begin(), report.items.end(),
                                  [](const AcceptanceItem& i) { return i.pass; });
    return report;
}

int run_named_experiment(const Config& cfg, const std::string& out_dir) {
    const std::string name = cfg.get_string("run.experiment", "");
    fs::create_directories(out_dir);
    {
        std::ofstream resolved(out_dir + "/config.resolved");
        resolved << cfg.canonical();
    }
    if (name == "suite") {
        const AcceptanceReport report = run_acceptance_suite(cfg, out_dir);
        return report.all_pass ? 0 : 2;
    }

    MetricsSink sink(out_dir + "/metrics.jsonl", name, cfg.hash_hex());
    if (name == "exactness") {
        const ExactnessResult r = run_exactness(cfg, &sink);
        std::printf("exactness: pearson=%.4f spearman=%.4f\n", r.pearson_mean, r.spearman_mean);
    } else if (name == "alignment") {
        const AlignmentResult r = run_alignment(cfg, &sink);
        std::printf("alignment: cos q1=%.3f q4=%.3f\n", r.cos_first_quarter, r.cos_last_quarter);
    } else if (name == "temporal") {
        const TemporalResult r = run_temporal(cfg, &sink);
        std::printf("temporal: pearson=%.3f auroc=%.3f\n", r.diagonal_vs_exact.pearson.value_or(0.0),
                    r.diagonal_vs_exact.auroc.value_or(0.0));
    } else if (name == "nlms_ablation") {
        const AblationResult r = run_nlms_ablation(cfg, &sink);
        for (std::size_t i = 0; i < r.condition.size(); ++i)
            std::printf("ablation %-16s reduction=%.3f\n", r.condition[i].c_str(), r.reduction[i]);
    } else if (name == "continual") {
        const ContinualResult r = run_continual(cfg, &sink);
        std::printf("continual: zero_shot=%.2fx post_relearn=%.3fx\n", r.zero_shot_ratio_median,
                    r.post_relearn_ratio_median);
    } else if (name == "damage") {
        const DamageResult r = run_damage_recovery(cfg, &sink);
        std::printf("damage: recovered=%.2fx immediate=%.2fx\n", r.recovered_ratio_median,
                    r.immediate_ratio_median);
    } else if (name == "criticality") {
        const CriticalityResult r = run_criticality(cfg, &sink);
        std::printf("criticality: rho_final_third=%.3f\n", r.final_third_mean);
    } else if (name == "memory") {
        const MemoryResult r = run_memory_capacity(cfg, &sink);
        std::printf("memory: r2(1)=%.3f r2(6)=%.3f\n", r.r2_per_delay[0], r.r2_per_delay[5]);
    } else if (name == "rl") {
        const RlResult r = run_rl(cfg, &sink);
        std::printf("rl: ma first=%.1f last=%.1f random=%.1f+-%.1f\n", r.first_quartile_ma_median,
                    r.last_quartile_ma_median, r.random_mean_median, r.random_std_median);
    } else if (name == "capacity") {
        const double cap = compositional_capacity(cfg.get_int("capacity.blocks", 64), cfg.get_int("capacity.k", 4),
                                                  cfg.get_int("capacity.ell", 32), cfg.get_double("capacity.c", 0.15));
        sink.record(0, "capacity/count", cap);
        std::printf("capacity: %.6g\n", cap);
    } else if (name == "prediction") {
        const PredictionResult r = run_prediction(cfg, &sink, out_dir);
        if (cfg.get_bool("prediction.csv", false)) sink.write_curves_csv(out_dir);
        std::printf("prediction: ewma_mse=%.6g nrmse=%.4f\n", r.final_ewma_mse, r.nrmse);
    } else if (name == "task_export") {
        const tasks::TaskStream ts = stream_from_config(cfg);
        const int length = cfg.get_int("task_export.length", 1000);
        const std::vector<double> s = ts.generate(length + 1);
        std::ofstream out(out_dir + "/" + cfg.get_string("task_export.file", "task.csv"));
        out << "step,u,y\n";
        for (int t = 0; t < length; ++t) out << t << "," << s[t] << "," << s[t + 1] << "\n";
    } else {
        throw std::invalid_argument("unknown experiment '" + name + "'");
    }
    return 0;
}

} // namespace trophic::experiments
