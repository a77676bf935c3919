#pragma once

#include <span>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/linalg.hpp"

namespace trophic {

struct LearnableHeads {
    DenseMatrix readout;       // R: d_out x N
    DenseMatrix value_readout; // R_V: 1 x N (RL only)
    DenseMatrix feedback;      // W_fb: N x d_out
    std::vector<double> bias;  // b: N
};

struct PlasticityRates {
    double eta_h = 0.5;    // Hebbian
    double eta_o = 5.0;    // Oja
    double eta_d = 1e-4;   // weight decay
    double eta_b = 0.01;   // bias
    double eta_out = 0.5;  // readout (NLMS)
    double eta_fb = 0.05;  // feedback alignment
    double p_star = 0.1;   // activity setpoint
    double eps_small = 1e-6;
    double norm_cap = 4.0;

    // Ablation toggles (see the NLMS ablation protocol).
    bool nlms = true;            // divide plastic terms by ||x||^2 + eps_small
    bool norm_projection = true; // project updates and weights to norm_cap

    // eta_fb <= eta_out / 10 <= max(eta_h, eta_o) / 100
    void validate() const;

    double nlms_divisor(double x_sq_norm) const {
        return nlms ? x_sq_norm + eps_small : 1.0;
    }
};

std::vector<double> readout_predict(const DenseMatrix& readout, std::span<const double> x);

/// Delta_R = -eta delta x^T / (||x||^2 + eps), norm-projected.
DenseMatrix nlms_readout_update(const DenseMatrix& readout, std::span<const double> x,
                                std::span<const double> delta, const PlasticityRates& rates);

/// eps = W_fb delta
std::vector<double> feedback_project(const DenseMatrix& feedback, std::span<const double> delta);

/// Delta_Wfb = -eta (W_fb delta - R^T delta) delta^T, norm-projected.
DenseMatrix feedback_align_update(const DenseMatrix& feedback, const DenseMatrix& readout,
                                  std::span<const double> delta, const PlasticityRates& rates);

/// Elementwise eps * (1 - x^2), the tanh-derivative gate.
std::vector<double> gated_error(std::span<const double> eps, std::span<const double> x);

/// Gated Hebbian-Oja update over the existing blocks of w:
///   dW_ij = tanh(E_j) (eta_h trc_i trc_j + eta_o x_i (x_j - x_i W_ij)) / (||x||^2 + eps)
///           - eta_d W_ij
/// with the decay term left unnormalized. eps_gated is the Jacobian-gated
/// postsynaptic error E. The delta has the same occupancy as w, masked
/// diagonals, and each block norm-projected.
BlockSparseMatrix recurrent_plasticity(const BlockSparseMatrix& w, std::span<const double> x,
                                       std::span<const double> trc, std::span<const double> eps_gated,
                                       const PlasticityRates& rates);

/// db_j = eta_b (p_star - a_j) / (||x||^2 + eps). Batch averaging is the
/// caller's job (mean over replicas in fixed order).
std::vector<double> homeostatic_bias_update(std::span<const double> a, std::span<const double> x,
                                            const PlasticityRates& rates);

/// Scale values so the Frobenius norm does not exceed cap (identity when
/// already within the cap).
void norm_project(std::span<double> values, double cap);

/// w += delta blockwise, then per-block norm projection and self-connection
/// masking. delta must share w's layout and occupancy.
void apply_block_delta(BlockSparseMatrix& w, const BlockSparseMatrix& delta, const PlasticityRates& rates);

} // namespace trophic
