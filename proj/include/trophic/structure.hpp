#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "trophic/block_sparse.hpp"

namespace trophic {

/// B x B exponential moving average of |block-mean eligibility x block-mean
/// gated error| outer products. Entry (m, n) scores the connection bundle
/// from block m to block n, matching the matrix storage convention.
struct TrophicFieldMap {
    int blocks = 0;
    double alpha = 1e-2; // long-horizon runs want ~1e-6; desk horizons need faster EMAs
    std::vector<double> t; // row-major B x B, non-negative

    TrophicFieldMap() = default;
    TrophicFieldMap(int b, double a) : blocks(b), alpha(a), t(static_cast<std::size_t>(b) * b, 0.0) {}

    double at(int m, int n) const { return t[static_cast<std::size_t>(m) * blocks + n]; }
    double& at(int m, int n) { return t[static_cast<std::size_t>(m) * blocks + n]; }
    double max_value() const;
};

/// T' = (1 - alpha) T + alpha |mean_block(trc) mean_block(eps_gated)^T|
void tfm_update(TrophicFieldMap& tfm, std::span<const double> trc, std::span<const double> eps_gated,
                const BlockLayout& layout);

/// Per-occupied-block survival score ||W^(ij)||_F * (1 + T_ij); 0 elsewhere.
std::vector<double> viability(const BlockSparseMatrix& w, const TrophicFieldMap& tfm);

struct StructuralPolicy {
    double base_percentile = 20.0; // p0
    double density_gain = 20.0;    // k_density
    double error_gain = 10.0;      // k_error
    int grow_count_max = 2;
    double init_scale = 0.1;    // new blocks ~ N(0, init_scale^2 / ell)
    int structural_period = 500;
    double admit_quantile = 0.5; // estimated viability must reach theta * admit_quantile
};

/// p = clamp(p0 + k_density * density + k_error * ewma_error, 1, 99)
double modulated_percentile(double density, double ewma_error, const StructuralPolicy& policy);

/// Linear-interpolated p-th percentile of values (p in [0, 100]).
double percentile_interpolated(std::vector<double> values, double p);

/// theta at the modulated percentile of the occupied-block viabilities.
/// Throws std::invalid_argument on an empty list (caller skips the step).
double survival_threshold(const std::vector<double>& viab_values, double density, double ewma_error,
                          const StructuralPolicy& policy);

/// Removes the occupied blocks whose viability is strictly below theta.
std::vector<std::pair<int, int>> prune(BlockSparseMatrix& w, const std::vector<double>& viab, double theta);

/// Weighted growth at unoccupied sites: candidates are sampled without
/// replacement with probability proportional to T_ij / max(T), admitted when
/// theta * (T_ij / max T) >= theta * admit_quantile, and initialized
/// Gaussian(0, init_scale^2 / ell) with self-connection masking. No growth
/// when max(T) = 0.
std::vector<std::pair<int, int>> grow(BlockSparseMatrix& w, const TrophicFieldMap& tfm, double theta,
                                      const StructuralPolicy& policy, std::uint64_t seed);

struct StructuralEvent {
    std::uint64_t step = 0;
    double percentile = 0.0;
    double theta = 0.0;
    double density_before = 0.0;
    double density_after = 0.0;
    std::vector<std::pair<int, int>> removed;
    std::vector<std::pair<int, int>> added;
};

/// Atomic viability -> threshold -> prune -> grow pipeline. ewma_error is the
/// task-normalized error driving the percentile. An empty viability list
/// yields a no-op event.
StructuralEvent structural_step(BlockSparseMatrix& w, const TrophicFieldMap& tfm, double ewma_error,
                                const StructuralPolicy& policy, std::uint64_t seed, std::uint64_t step);

} // namespace trophic
