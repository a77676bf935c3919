#include "trophic/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trophic/checkpoint.hpp"
#include "trophic/rng.hpp"

namespace trophic {

NetworkConfig NetworkConfig::from_config(const Config& cfg, int d_in, int d_out) {
    NetworkConfig n;
    n.blocks = cfg.get_int("network.blocks", n.blocks);
    n.block_size = cfg.get_int("network.block_size", n.block_size);
    n.max_row_blocks = cfg.get_int("network.max_row_blocks", 0);
    n.init_row_blocks = cfg.get_int("network.init_row_blocks", 0);
    n.init_gain = cfg.get_double("network.init_gain", n.init_gain);
    n.w_in_scale = cfg.get_double("network.w_in_scale", n.w_in_scale);
    n.bias_init = cfg.get_double("network.bias_init", n.bias_init);
    n.fb_init = cfg.get_double("network.fb_init", n.fb_init);
    n.tau_fast = cfg.get_double("dynamics.tau_fast", n.tau_fast);
    n.noise_sigma = cfg.get_double("dynamics.noise_sigma", n.noise_sigma);
    n.tfm_alpha = cfg.get_double("structure.alpha", n.tfm_alpha);
    n.seed = cfg.get_u64("run.seed", n.seed);
    n.d_in = d_in;
    n.d_out = d_out;
    return n;
}

int NetworkConfig::resolved_max_row_blocks() const {
    if (max_row_blocks > 0) return max_row_blocks;
    return std::max(1, blocks / 4);
}

int NetworkConfig::resolved_init_row_blocks() const {
    const int cap = resolved_max_row_blocks();
    if (init_row_blocks > 0) return std::min(init_row_blocks, cap);
    return cap;
}

Network Network::build(const NetworkConfig& cfg) {
    BlockLayout layout{cfg.blocks, cfg.block_size, cfg.resolved_max_row_blocks()};
    layout.validate();
    const int n = layout.neurons();
    const int ell = layout.block_size;
    const int fill = cfg.resolved_init_row_blocks();

    Network net{layout, BlockSparseMatrix(layout), DenseMatrix(n, cfg.d_in), LearnableHeads{},
                TrophicFieldMap(cfg.blocks, cfg.tfm_alpha), DynamicsParams{}, cfg.seed};
    net.dyn = DynamicsParams::from_tau_fast(cfg.tau_fast, cfg.noise_sigma);

    // Row-wise random occupancy: take the init_row_blocks smallest keys.
    const std::uint64_t seed_occ = rng::mix2(cfg.seed, 0x0ccull);
    const std::uint64_t seed_blk = rng::mix2(cfg.seed, 0xb10c5ull);
    const double sd = cfg.init_gain / std::sqrt(static_cast<double>(fill) * ell);
    std::vector<double> payload(static_cast<std::size_t>(ell) * ell);
    for (int i = 0; i < cfg.blocks; ++i) {
        std::vector<int> order(cfg.blocks);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ka = rng::uniform(seed_occ, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(a));
            const double kb = rng::uniform(seed_occ, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(b));
            if (ka != kb) return ka < kb;
            return a < b;
        });
        for (int k = 0; k < fill; ++k) {
            const int j = order[k];
            for (int e = 0; e < ell * ell; ++e)
                payload[e] = sd * rng::gaussian(seed_blk, static_cast<std::uint64_t>(i) * cfg.blocks + j,
                                                static_cast<std::uint64_t>(e));
            net.w.insert_block(i, j, payload);
        }
    }

    const std::uint64_t seed_in = rng::mix2(cfg.seed, 0x17ull);
    const double in_scale = 0.5 * cfg.w_in_scale / std::sqrt(static_cast<double>(cfg.d_in));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < cfg.d_in; ++c)
            net.w_in.at(r, c) =
                in_scale * (2.0 * rng::uniform(seed_in, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)) - 1.0);

    net.heads.readout = DenseMatrix(cfg.d_out, n);
    net.heads.value_readout = DenseMatrix(1, n);
    net.heads.feedback = DenseMatrix(n, cfg.d_out);
    net.heads.bias.assign(n, 0.0);

    const std::uint64_t seed_fb = rng::mix2(cfg.seed, 0xfbull);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < cfg.d_out; ++c)
            net.heads.feedback.at(r, c) =
                cfg.fb_init * rng::gaussian(seed_fb, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));

    const std::uint64_t seed_b = rng::mix2(cfg.seed, 0xb1a5ull);
    for (int r = 0; r < n; ++r)
        net.heads.bias[r] = cfg.bias_init * rng::gaussian(seed_b, static_cast<std::uint64_t>(r), 0);

    return net;
}

void Network::save(std::ostream& out) const {
    checkpoint::write_matrix(out, w);
    checkpoint::write_dense(out, w_in);
    checkpoint::write_dense(out, heads.readout);
    checkpoint::write_dense(out, heads.value_readout);
    checkpoint::write_dense(out, heads.feedback);
    checkpoint::write_f64_vec(out, heads.bias);
    checkpoint::write_u32(out, static_cast<std::uint32_t>(tfm.blocks));
    checkpoint::write_f64(out, tfm.alpha);
    checkpoint::write_f64_vec(out, tfm.t);
    checkpoint::write_u64(out, seed);
    checkpoint::write_f64(out, dyn.dt);
    checkpoint::write_f64(out, dyn.tau_fast);
    checkpoint::write_f64(out, dyn.noise_sigma);
}

Network Network::load(std::istream& in) {
    BlockSparseMatrix w = checkpoint::read_matrix(in);
    Network net{w.layout(), std::move(w), DenseMatrix{}, LearnableHeads{}, TrophicFieldMap{}, DynamicsParams{}, 0};
    net.w_in = checkpoint::read_dense(in);
    net.heads.readout = checkpoint::read_dense(in);
    net.heads.value_readout = checkpoint::read_dense(in);
    net.heads.feedback = checkpoint::read_dense(in);
    net.heads.bias = checkpoint::read_f64_vec(in);
    net.tfm.blocks = static_cast<int>(checkpoint::read_u32(in));
    net.tfm.alpha = checkpoint::read_f64(in);
    net.tfm.t = checkpoint::read_f64_vec(in);
    net.seed = checkpoint::read_u64(in);
    const double dt = checkpoint::read_f64(in);
    const double tau_fast = checkpoint::read_f64(in);
    const double sigma = checkpoint::read_f64(in);
    net.dyn = DynamicsParams::from_tau_fast(tau_fast, sigma, dt);
    return net;
}

} // namespace trophic
