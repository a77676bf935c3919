#include "trophic/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "trophic/checkpoint.hpp"
#include "trophic/rng.hpp"

namespace trophic {

TrainerOptions TrainerOptions::from_config(const Config& cfg) {
    TrainerOptions o;
    o.rates.eta_h = cfg.get_double("rates.eta_h", o.rates.eta_h);
    o.rates.eta_o = cfg.get_double("rates.eta_o", o.rates.eta_o);
    o.rates.eta_d = cfg.get_double("rates.eta_d", o.rates.eta_d);
    o.rates.eta_b = cfg.get_double("rates.eta_b", o.rates.eta_b);
    o.rates.eta_out = cfg.get_double("rates.eta_out", o.rates.eta_out);
    o.rates.eta_fb = cfg.get_double("rates.eta_fb", o.rates.eta_fb);
    o.rates.p_star = cfg.get_double("rates.p_star", o.rates.p_star);
    o.rates.eps_small = cfg.get_double("rates.eps_small", o.rates.eps_small);
    o.rates.norm_cap = cfg.get_double("rates.norm_cap", o.rates.norm_cap);
    o.rates.nlms = cfg.get_bool("rates.nlms", o.rates.nlms);
    o.rates.norm_projection = cfg.get_bool("rates.norm_projection", o.rates.norm_projection);
    o.rates.validate();

    o.spolicy.base_percentile = cfg.get_double("structure.base_percentile", o.spolicy.base_percentile);
    o.spolicy.density_gain = cfg.get_double("structure.density_gain", o.spolicy.density_gain);
    o.spolicy.error_gain = cfg.get_double("structure.error_gain", o.spolicy.error_gain);
    o.spolicy.grow_count_max = cfg.get_int("structure.grow_count_max", o.spolicy.grow_count_max);
    o.spolicy.init_scale = cfg.get_double("structure.init_scale", o.spolicy.init_scale);
    o.spolicy.structural_period = cfg.get_int("structure.period", o.spolicy.structural_period);
    o.spolicy.admit_quantile = cfg.get_double("structure.admit_quantile", o.spolicy.admit_quantile);
    o.structural = cfg.get_bool("structure.enabled", o.structural);
    o.baseline_mse = cfg.get_double("structure.baseline_mse", o.baseline_mse);
    o.replicas = cfg.get_int("train.replicas", o.replicas);
    if (o.replicas < 1) throw std::invalid_argument("train.replicas must be >= 1");
    return o;
}

Trainer::Trainer(Network net, TrainerOptions opt) : net_(std::move(net)), opt_(opt) {
    const int n = net_.layout.neurons();
    states_.reserve(opt_.replicas);
    for (int r = 0; r < opt_.replicas; ++r)
        states_.push_back(NetworkState::zeros(n, rng::mix2(net_.seed, static_cast<std::uint64_t>(r))));
}

StepOutcome Trainer::step(const std::vector<std::vector<double>>& u_batch,
                          const std::vector<std::vector<double>>& y_batch, bool learn) {
    const int R = opt_.replicas;
    if (static_cast<int>(u_batch.size()) != R || static_cast<int>(y_batch.size()) != R)
        throw std::invalid_argument("Trainer::step: batch size must equal replica count");
    const int n = net_.layout.neurons();
    const int d_out = net_.heads.readout.rows;

    StepOutcome out;
    DenseMatrix acc_readout(d_out, n), acc_feedback(n, d_out);
    std::vector<double> acc_bias(n, 0.0);
    std::optional<BlockSparseMatrix> acc_w;
    std::vector<double> mean_trc(n, 0.0), mean_gated(n, 0.0);

    double mse_sum = 0.0, cos_sum = 0.0;
    int cos_count = 0;
    for (int r = 0; r < R; ++r) {
        NetworkState& s = states_[r];
        trophic::step(s, net_.w, net_.w_in, u_batch[r], net_.heads.bias, net_.dyn);

        std::vector<double> y_hat = readout_predict(net_.heads.readout, s.x);
        std::vector<double> delta(d_out);
        for (int k = 0; k < d_out; ++k) delta[k] = y_hat[k] - y_batch[r][k];
        mse_sum += squared_norm(delta) / d_out;

        const std::vector<double> eps = feedback_project(net_.heads.feedback, delta);
        const std::vector<double> eg = gated_error(eps, s.x);

        std::vector<double> target(n, 0.0);
        net_.heads.readout.matvec_transpose(delta, target);
        const double na = norm2(eps), nb = norm2(target);
        if (na > 0.0 && nb > 0.0) {
            cos_sum += dot(eps, target) / (na * nb);
            ++cos_count;
        }

        if (learn) {
            if (opt_.learn_readout) {
                const DenseMatrix d = nlms_readout_update(net_.heads.readout, s.x, delta, opt_.rates);
                for (std::size_t k = 0; k < d.v.size(); ++k) acc_readout.v[k] += d.v[k];
            }
            if (opt_.learn_feedback) {
                const DenseMatrix d = feedback_align_update(net_.heads.feedback, net_.heads.readout, delta, opt_.rates);
                for (std::size_t k = 0; k < d.v.size(); ++k) acc_feedback.v[k] += d.v[k];
            }
            if (opt_.learn_bias) {
                const std::vector<double> db = homeostatic_bias_update(s.a, s.x, opt_.rates);
                for (int k = 0; k < n; ++k) acc_bias[k] += db[k];
            }
            if (opt_.learn_recurrent) {
                BlockSparseMatrix dw = recurrent_plasticity(net_.w, s.x, s.trc, eg, opt_.rates);
                if (!acc_w) {
                    acc_w = std::move(dw);
                } else {
                    acc_w->for_each_block([&](int i, int j, std::span<double> blk) {
                        std::span<const double> other = dw.block(i, j);
                        for (std::size_t k = 0; k < blk.size(); ++k) blk[k] += other[k];
                    });
                }
            }
            for (int k = 0; k < n; ++k) {
                mean_trc[k] += s.trc[k] / R;
                mean_gated[k] += eg[k] / R;
            }
        }
    }
    out.mse = mse_sum / R;
    out.cosine_alignment = cos_count > 0 ? cos_sum / cos_count : std::nan("");

    if (learn) {
        const double inv_r = 1.0 / R;
        if (opt_.learn_readout) {
            for (std::size_t k = 0; k < acc_readout.v.size(); ++k)
                net_.heads.readout.v[k] += acc_readout.v[k] * inv_r;
            if (opt_.rates.norm_projection) norm_project(net_.heads.readout.v, opt_.rates.norm_cap);
        }
        if (opt_.learn_feedback) {
            for (std::size_t k = 0; k < acc_feedback.v.size(); ++k)
                net_.heads.feedback.v[k] += acc_feedback.v[k] * inv_r;
            if (opt_.rates.norm_projection) norm_project(net_.heads.feedback.v, opt_.rates.norm_cap);
        }
        if (opt_.learn_bias)
            for (int k = 0; k < n; ++k) net_.heads.bias[k] += acc_bias[k] * inv_r;
        if (opt_.learn_recurrent && acc_w) {
            if (R > 1)
                acc_w->for_each_block([&](int, int, std::span<double> blk) {
                    for (double& v : blk) v *= inv_r;
                });
            apply_block_delta(net_.w, *acc_w, opt_.rates);
        }
        tfm_update(net_.tfm, mean_trc, mean_gated, net_.layout);
    }

    const double mse = out.mse;
    ewma_mse_ = ewma_mse_ < 0.0 ? mse : opt_.mse_ewma_rate * ewma_mse_ + (1.0 - opt_.mse_ewma_rate) * mse;

    const std::uint64_t gstep = global_step();
    if (learn && opt_.structural && opt_.spolicy.structural_period > 0 && gstep > 0 &&
        gstep % static_cast<std::uint64_t>(opt_.spolicy.structural_period) == 0) {
        const double err_norm = std::min(1.0, ewma_mse_ / std::max(opt_.baseline_mse, 1e-12));
        out.structural = structural_step(net_.w, net_.tfm, err_norm, opt_.spolicy,
                                         rng::mix2(rng::mix2(net_.seed, 0x57e9ull), gstep), gstep);
    }
    return out;
}

StepOutcome Trainer::step_scalar(double u, double y, bool learn) {
    const std::vector<std::vector<double>> ub(opt_.replicas, std::vector<double>{u});
    const std::vector<std::vector<double>> yb(opt_.replicas, std::vector<double>{y});
    return step(ub, yb, learn);
}

oracle::Trajectory Trainer::collect(const std::vector<std::vector<double>>& u_steps,
                                    const std::vector<std::vector<double>>& y_steps) {
    if (opt_.replicas != 1)
        throw std::runtime_error("Trainer::collect requires a single replica");
    const int n = net_.layout.neurons();
    const int d_out = net_.heads.readout.rows;

    oracle::Trajectory traj;
    traj.params = net_.dyn;
    traj.noise_seed = states_[0].noise_seed;
    traj.start_step = states_[0].step;
    traj.x0 = states_[0].x;

    for (std::size_t t = 0; t < u_steps.size(); ++t) {
        NetworkState& s = states_[0];
        trophic::step(s, net_.w, net_.w_in, u_steps[t], net_.heads.bias, net_.dyn);

        std::vector<double> y_hat = readout_predict(net_.heads.readout, s.x);
        std::vector<double> delta(d_out);
        for (int k = 0; k < d_out; ++k) delta[k] = y_hat[k] - y_steps[t][k];

        const std::vector<double> eps = feedback_project(net_.heads.feedback, delta);
        std::vector<double> target(n, 0.0);
        net_.heads.readout.matvec_transpose(delta, target);

        traj.x.push_back(s.x);
        traj.trc.push_back(s.trc);
        traj.eps_gated.push_back(gated_error(eps, s.x));
        traj.eps_gated_analytic.push_back(gated_error(target, s.x));
        traj.u.push_back(u_steps[t]);
        traj.y.push_back(y_steps[t]);
    }
    return traj;
}

void Trainer::save(std::ostream& out) const {
    checkpoint::write_header(out);
    net_.save(out);
    checkpoint::write_u32(out, static_cast<std::uint32_t>(states_.size()));
    for (const NetworkState& s : states_) checkpoint::write_state(out, s);
    checkpoint::write_f64(out, ewma_mse_);
}

Trainer Trainer::load(std::istream& in, TrainerOptions opt) {
    checkpoint::read_header(in);
    Network net = Network::load(in);
    const std::uint32_t n_states = checkpoint::read_u32(in);
    if (static_cast<int>(n_states) != opt.replicas)
        throw std::runtime_error("checkpoint replica count does not match configuration");
    Trainer t(std::move(net), opt);
    for (std::uint32_t r = 0; r < n_states; ++r) t.states_[r] = checkpoint::read_state(in);
    t.ewma_mse_ = checkpoint::read_f64(in);
    return t;
}

} // namespace trophic
