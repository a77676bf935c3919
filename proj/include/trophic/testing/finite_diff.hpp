#pragma once

// Test-only numerical oracles. Nothing in the runtime path includes this
// header; it exists so the unit tests and the acceptance suite can check the
// analytic gradient oracles against central finite differences.

#include <cmath>
#include <cstdint>
#include <vector>

#include "trophic/network.hpp"
#include "trophic/oracle.hpp"
#include "trophic/trainer.hpp"

namespace trophic::testing {

/// Central finite differences of the trajectory loss with respect to every
/// existing synapse, in synapse_index order.
inline std::vector<double> finite_difference_gradients(const oracle::Trajectory& traj,
                                                       const BlockSparseMatrix& w, const DenseMatrix& w_in,
                                                       std::span<const double> b, const DenseMatrix& readout,
                                                       double h = 1e-5) {
    const auto synapses = oracle::synapse_index(w);
    const int ell = w.layout().block_size;
    std::vector<double> grads;
    grads.reserve(synapses.size());
    BlockSparseMatrix pert(w.layout(), false); // copy without re-masking on perturbation
    pert = w;
    for (auto [k, l] : synapses) {
        const int bi = k / ell, bj = l / ell;
        const int e = (k % ell) * ell + (l % ell);
        auto blk = pert.block(bi, bj);
        const double keep = blk[e];
        blk[e] = keep + h;
        const double up = oracle::trajectory_loss(traj, pert, w_in, b, readout);
        blk[e] = keep - h;
        const double down = oracle::trajectory_loss(traj, pert, w_in, b, readout);
        blk[e] = keep;
        grads.push_back((up - down) / (2.0 * h));
    }
    return grads;
}

/// max_i |a_i - b_i| / max_i |b_i|
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

/// Subset a dense N x N synapse map to the existing synapses, in
/// synapse_index order.
inline std::vector<double> subset_to_occupied(const std::vector<double>& dense, const BlockSparseMatrix& w) {
    const int n = w.layout().neurons();
    std::vector<double> out;
    for (auto [k, l] : oracle::synapse_index(w)) out.push_back(dense[static_cast<std::size_t>(k) * n + l]);
    return out;
}

struct OracleChecks {
    double fd_rel_error = 0.0;    // BPTT vs central finite differences
    double eprop_rel_error = 0.0; // forward e-prop vs BPTT
};

/// The 2-block / 8-neuron / 10-step oracle-correctness fixture.
inline OracleChecks run_oracle_checks(std::uint64_t seed) {
    NetworkConfig ncfg;
    ncfg.blocks = 2;
    ncfg.block_size = 4;
    ncfg.max_row_blocks = 2;
    ncfg.init_row_blocks = 2;
    ncfg.seed = seed;
    ncfg.init_gain = 0.9;
    TrainerOptions opt;
    opt.structural = false;
    Trainer tr(Network::build(ncfg), opt);

    // give the readout and feedback something to differentiate through
    for (int c = 0; c < 8; ++c) {
        tr.net().heads.readout.at(0, c) = 0.1 * (c + 1) * (c % 2 ? 1 : -1);
        tr.net().heads.feedback.at(c, 0) = 0.05 * (8 - c);
    }

    std::vector<std::vector<double>> us, ys;
    for (int t = 0; t < 10; ++t) {
        us.push_back({std::sin(0.3 * t)});
        ys.push_back({std::cos(0.25 * t)});
    }
    const oracle::Trajectory traj = tr.collect(us, ys);
    const Network& net = tr.net();

    const std::vector<double> dense =
        oracle::bptt_synapse_gradients(traj, net.w, net.w_in, net.heads.bias, net.heads.readout);
    const std::vector<double> bptt = subset_to_occupied(dense, net.w);
    const std::vector<double> fd =
        finite_difference_gradients(traj, net.w, net.w_in, net.heads.bias, net.heads.readout);
    const std::vector<double> eprop =
        oracle::forward_eprop_exact(traj, net.w, net.w_in, net.heads.bias, net.heads.readout);

    OracleChecks res;
    res.fd_rel_error = max_relative_error(bptt, fd);
    res.eprop_rel_error = max_relative_error(eprop, bptt);
    return res;
}

} // namespace trophic::testing
