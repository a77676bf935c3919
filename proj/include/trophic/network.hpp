#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/config.hpp"
#include "trophic/dynamics.hpp"
#include "trophic/learning.hpp"
#include "trophic/structure.hpp"

namespace trophic {

struct NetworkConfig {
    int blocks = 8;
    int block_size = 32;
    int max_row_blocks = 0;  // 0 -> blocks / 4 (min 1)
    int init_row_blocks = 0; // 0 -> max_row_blocks
    double init_gain = 1.0;
    double w_in_scale = 1.0;
    double bias_init = 0.1;
    double fb_init = 0.05;
    int d_in = 1;
    int d_out = 1;
    double tau_fast = 10.0;
    double noise_sigma = 0.01;
    double tfm_alpha = 1e-2;
    std::uint64_t seed = 1;

    static NetworkConfig from_config(const Config& cfg, int d_in, int d_out);
    int resolved_max_row_blocks() const;
    int resolved_init_row_blocks() const;
};

/// Weights, heads, traces and the trophic map of one agent. Construction is
/// fully determined by the config seed.
struct Network {
    BlockLayout layout;
    BlockSparseMatrix w;
    DenseMatrix w_in; // N x d_in
    LearnableHeads heads;
    TrophicFieldMap tfm;
    DynamicsParams dyn;
    std::uint64_t seed = 0;

    static Network build(const NetworkConfig& cfg);

    void save(std::ostream& out) const;
    static Network load(std::istream& in);
};

} // namespace trophic
