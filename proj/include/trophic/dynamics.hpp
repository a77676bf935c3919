#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/linalg.hpp"

namespace trophic {

/// Time is counted in integer steps (1 step = 2 ms nominal). Decay factors
/// follow the exponential-Euler form alpha = exp(-dt / tau), and the slow
/// constants are tied to tau_fast by fixed ratios: tau_elig = 10 tau_fast,
/// tau_act = 5000 tau_elig.
struct DynamicsParams {
    double dt = 1.0;
    double tau_fast = 10.0;
    double tau_elig = 100.0;
    double tau_act = 500000.0;
    double noise_sigma = 0.01;
    double alpha_fast = 0.0;
    double alpha_elig = 0.0;
    double alpha_act = 0.0;

    static DynamicsParams from_tau_fast(double tau_fast, double noise_sigma = 0.01, double dt = 1.0);
    void refresh_alphas();
    void validate() const; // enforces the timescale ratios and 0 < alpha < 1
};

struct NetworkState {
    std::vector<double> x;   // activations, kept strictly inside (-1, 1)
    std::vector<double> trc; // eligibility traces
    std::vector<double> a;   // slow activity traces
    std::uint64_t step = 0;
    std::uint64_t noise_seed = 0;

    static NetworkState zeros(int n, std::uint64_t seed);
};

/// Gaussian(0, sigma^2) variate as a pure function of (seed, step, index).
double noise_sample(std::uint64_t seed, std::uint64_t step, std::uint64_t index, double sigma);

/// One exponential-Euler step of
///   x' = alpha_fast x + (1 - alpha_fast) tanh(W^T x + W_in u + b) + noise
/// followed by clamping into the open unit interval and the trace updates.
/// w_in is N x d_in. Throws std::runtime_error naming the neuron if the
/// pre-activation goes non-finite.
void step(NetworkState& s, const BlockSparseMatrix& w, const DenseMatrix& w_in,
          std::span<const double> u, std::span<const double> b, const DynamicsParams& p);

/// trc' = alpha_elig trc + (1 - alpha_fast) x;  a' = alpha_act a + (1 - alpha_act) |x|.
/// Called by step() with the post-update x; exposed for tests.
void update_traces(NetworkState& s, const DynamicsParams& p);

/// Dense one-step Jacobian of the implemented map at the current state:
///   J = alpha_fast I + (1 - alpha_fast) diag(1 - h^2) W^T,
/// h = tanh(W^T x + W_in u + b). Row-major N x N.
std::vector<double> one_step_jacobian(const BlockSparseMatrix& w, std::span<const double> x,
                                      const DenseMatrix& w_in, std::span<const double> u,
                                      std::span<const double> b, const DynamicsParams& p);

struct SpectralRadiusResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Largest |eigenvalue| of the one-step Jacobian, estimated matrix-free by
/// two-column orthogonal iteration (handles complex-conjugate dominant
/// pairs). Non-convergence returns the best estimate with converged=false.
SpectralRadiusResult spectral_radius(const BlockSparseMatrix& w, std::span<const double> x,
                                     const DenseMatrix& w_in, std::span<const double> u,
                                     std::span<const double> b, const DynamicsParams& p,
                                     int iters = 200, double tol = 1e-6);

} // namespace trophic
