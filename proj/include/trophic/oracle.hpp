#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/dynamics.hpp"
#include "trophic/linalg.hpp"

namespace trophic::oracle {

/// A frozen-plasticity recording of network signals. The oracles replay the
/// same noisy trajectory from (noise_seed, start_step) and refuse to run if
/// the replay diverges from the recorded states.
struct Trajectory {
    DynamicsParams params;
    std::uint64_t noise_seed = 0;
    std::uint64_t start_step = 0;
    std::vector<double> x0;                       // state before the first recorded step
    std::vector<std::vector<double>> x;           // post-step states, t = 1..T
    std::vector<std::vector<double>> trc;         // eligibility traces after each step
    std::vector<std::vector<double>> eps_gated;   // feedback error, Jacobian-gated
    std::vector<std::vector<double>> eps_gated_analytic; // R^T delta variant, gated
    std::vector<std::vector<double>> u;           // inputs
    std::vector<std::vector<double>> y;           // targets
    int steps() const { return static_cast<int>(x.size()); }
};

/// Mean-over-time readout loss the gradient oracles differentiate:
///   L = (1/T) sum_t 0.5 || R x_t - y_t ||^2.
double trajectory_loss(const Trajectory& traj, const BlockSparseMatrix& w, const DenseMatrix& w_in,
                       std::span<const double> b, const DenseMatrix& readout);

/// Dense reverse-mode gradient dL/dM(k,l) through the exact discrete update,
/// noise replayed as a constant. Row-major N x N in the (pre, post) storage
/// convention. Guard: N <= 4096, T <= 512.
std::vector<double> bptt_synapse_gradients(const Trajectory& traj, const BlockSparseMatrix& w,
                                           const DenseMatrix& w_in, std::span<const double> b,
                                           const DenseMatrix& readout);

/// G_post: B x B map of per-step block-gradient magnitudes averaged over the
/// trajectory, G[i][j] = (1/T) sum_t | sum_{k in i, l in j} dL/dM(k,l) at t |.
std::vector<double> bptt_block_gradients(const Trajectory& traj, const BlockSparseMatrix& w,
                                         const DenseMatrix& w_in, std::span<const double> b,
                                         const DenseMatrix& readout);

/// H_post: (1/T) sum_t | mean_block(trc_t) mean_block(eps_gated_t)^T |, the
/// same signal stream the trophic map consumes. Set analytic_variant to use
/// the recorded R^T delta errors instead of the feedback-projected ones.
std::vector<double> local_heuristic(const Trajectory& traj, const BlockLayout& layout,
                                    bool analytic_variant = false);

/// Existing synapses in deterministic order: block-row-major over occupancy,
/// row-major within each block. All per-synapse maps share this order.
std::vector<std::pair<int, int>> synapse_index(const BlockSparseMatrix& w);

/// Exact forward-mode sensitivities dL/dM(k,l) for every existing synapse,
/// propagated through the full Jacobian. Guard: N <= 1024, T <= 64.
std::vector<double> forward_eprop_exact(const Trajectory& traj, const BlockSparseMatrix& w,
                                        const DenseMatrix& w_in, std::span<const double> b,
                                        const DenseMatrix& readout);

/// Local diagonal estimate per existing synapse:
///   sum_t (dL_t/dx_l) * (1 - x_t(l)^2) * m_t(k),
/// where m is the eligibility-rate EMA of presynaptic activity. Disabling
/// jacobian_gate drops the (1 - x^2) factor (the EMA-only variant).
std::vector<double> diagonal_approx(const Trajectory& traj, const BlockSparseMatrix& w,
                                    const DenseMatrix& readout, bool jacobian_gate = true);

/// Correlation and ranking agreement between two flattened credit maps.
/// Degenerate inputs (zero variance, no positives) leave the metric unset
/// rather than reporting a silent zero.
struct CreditComparison {
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::optional<double> cosine;
    std::optional<double> auroc;          // positives: top k_fraction of |b|
    std::optional<double> precision_at_k;
};

CreditComparison compare(std::span<const double> a, std::span<const double> b, double k_fraction = 0.1);

double pearson(std::span<const double> a, std::span<const double> b);
std::vector<double> average_ranks(std::span<const double> v);

} // namespace trophic::oracle
