#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trophic/config.hpp"
#include "trophic/network.hpp"
#include "trophic/oracle.hpp"
#include "trophic/structure.hpp"

namespace trophic {

struct TrainerOptions {
    PlasticityRates rates;
    StructuralPolicy spolicy;
    bool learn_readout = true;
    bool learn_feedback = true;
    bool learn_recurrent = true;
    bool learn_bias = true;
    bool structural = true;
    int replicas = 1;
    double baseline_mse = 1.0;  // normalizer feeding the survival percentile
    double mse_ewma_rate = 0.99;

    static TrainerOptions from_config(const Config& cfg);
};

struct StepOutcome {
    double mse = 0.0;              // batch-mean squared error per output
    double cosine_alignment = 0.0; // cos(eps, R^T delta), NaN when degenerate
    std::optional<StructuralEvent> structural;
};

/// Online learning loop: shared parameters, one NetworkState per replica,
/// batch updates reduced as replica means in fixed order. All event-level
/// randomness is counter-based on (run seed, step), so a reloaded checkpoint
/// continues the exact original run.
class Trainer {
public:
    Trainer(Network net, TrainerOptions opt);

    /// One full update step. u_batch/y_batch hold one input/target per
    /// replica. learn=false runs dynamics and metrics only.
    StepOutcome step(const std::vector<std::vector<double>>& u_batch,
                     const std::vector<std::vector<double>>& y_batch, bool learn = true);

    /// Scalar-task convenience: same input for every replica.
    StepOutcome step_scalar(double u, double y, bool learn = true);

    /// Frozen-plasticity recording of the per-step credit signals on replica
    /// 0 (requires replicas == 1 so batch and recording coincide).
    oracle::Trajectory collect(const std::vector<std::vector<double>>& u_steps,
                               const std::vector<std::vector<double>>& y_steps);

    Network& net() { return net_; }
    const Network& net() const { return net_; }
    const TrainerOptions& options() const { return opt_; }
    void set_structural(bool on) { opt_.structural = on; }
    std::vector<NetworkState>& states() { return states_; }
    std::uint64_t global_step() const { return states_[0].step; }
    double ewma_mse() const { return ewma_mse_; }

    void save(std::ostream& out) const;
    static Trainer load(std::istream& in, TrainerOptions opt);

private:
    Network net_;
    TrainerOptions opt_;
    std::vector<NetworkState> states_;
    double ewma_mse_ = -1.0; // <0: not yet primed
};

} // namespace trophic
