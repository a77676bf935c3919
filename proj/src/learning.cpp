#include "trophic/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trophic {

void PlasticityRates::validate() const {
    for (double e : {eta_h, eta_o, eta_d, eta_b, eta_out, eta_fb})
        if (e < 0.0) throw std::invalid_argument("PlasticityRates: rates must be non-negative");
    if (eps_small < 0.0) throw std::invalid_argument("PlasticityRates: eps_small must be >= 0");
    if (norm_cap <= 0.0) throw std::invalid_argument("PlasticityRates: norm_cap must be > 0");
    const double eta_w = std::max(eta_h, eta_o);
    if (eta_fb > eta_out / 10.0 + 1e-12 || eta_out / 10.0 > eta_w / 100.0 + 1e-12)
        throw std::invalid_argument(
            "PlasticityRates: timescale ordering violated (need eta_fb <= eta_out/10 <= max(eta_h,eta_o)/100)");
}

std::vector<double> readout_predict(const DenseMatrix& readout, std::span<const double> x) {
    std::vector<double> y(readout.rows, 0.0);
    readout.matvec(x, y);
    return y;
}

void norm_project(std::span<double> values, double cap) {
    double s = 0.0;
    for (double v : values) s += v * v;
    const double norm = std::sqrt(s);
    if (norm <= cap || norm == 0.0) return;
    const double scale = cap / norm;
    for (double& v : values) v *= scale;
}

DenseMatrix nlms_readout_update(const DenseMatrix& readout, std::span<const double> x,
                                std::span<const double> delta, const PlasticityRates& rates) {
    if (static_cast<int>(x.size()) != readout.cols || static_cast<int>(delta.size()) != readout.rows)
        throw std::invalid_argument("nlms_readout_update: dimension mismatch");
    DenseMatrix d(readout.rows, readout.cols);
    const double denom = rates.nlms_divisor(squared_norm(x));
    for (int r = 0; r < d.rows; ++r) {
        const double f = -rates.eta_out * delta[r] / denom;
        for (int c = 0; c < d.cols; ++c) d.at(r, c) = f * x[c];
    }
    if (rates.norm_projection) norm_project(d.v, rates.norm_cap);
    return d;
}

std::vector<double> feedback_project(const DenseMatrix& feedback, std::span<const double> delta) {
    std::vector<double> eps(feedback.rows, 0.0);
    feedback.matvec(delta, eps);
    return eps;
}

DenseMatrix feedback_align_update(const DenseMatrix& feedback, const DenseMatrix& readout,
                                  std::span<const double> delta, const PlasticityRates& rates) {
    const int n = feedback.rows;
    const int d_out = feedback.cols;
    if (readout.rows != d_out || readout.cols != n || static_cast<int>(delta.size()) != d_out)
        throw std::invalid_argument("feedback_align_update: dimension mismatch");

    std::vector<double> eps(n, 0.0), target(n, 0.0);
    feedback.matvec(delta, eps);
    readout.matvec_transpose(delta, target);

    DenseMatrix d(n, d_out);
    for (int r = 0; r < n; ++r) {
        const double resid = eps[r] - target[r];
        for (int c = 0; c < d_out; ++c) d.at(r, c) = -rates.eta_fb * resid * delta[c];
    }
    if (rates.norm_projection) norm_project(d.v, rates.norm_cap);
    return d;
}

std::vector<double> gated_error(std::span<const double> eps, std::span<const double> x) {
    if (eps.size() != x.size()) throw std::invalid_argument("gated_error: dimension mismatch");
    std::vector<double> out(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) out[i] = eps[i] * (1.0 - x[i] * x[i]);
    return out;
}

BlockSparseMatrix recurrent_plasticity(const BlockSparseMatrix& w, std::span<const double> x,
                                       std::span<const double> trc, std::span<const double> eps_gated,
                                       const PlasticityRates& rates) {
    const int n = w.layout().neurons();
    const int ell = w.layout().block_size;
    if (static_cast<int>(x.size()) != n || static_cast<int>(trc.size()) != n ||
        static_cast<int>(eps_gated.size()) != n)
        throw std::invalid_argument("recurrent_plasticity: dimension mismatch");

    const double inv = 1.0 / rates.nlms_divisor(squared_norm(x));

    BlockSparseMatrix delta(w.layout(), w.masks_self_connections());
    std::vector<double> payload(static_cast<std::size_t>(ell) * ell);
    w.for_each_block([&](int bi, int bj, std::span<const double> blk) {
        for (int r = 0; r < ell; ++r) {
            const int i = bi * ell + r; // presynaptic neuron
            for (int c = 0; c < ell; ++c) {
                const int j = bj * ell + c; // postsynaptic neuron
                const double w_ij = blk[static_cast<std::size_t>(r) * ell + c];
                const double gate = std::tanh(eps_gated[j]);
                const double hebb = rates.eta_h * trc[i] * trc[j];
                const double oja = rates.eta_o * x[i] * (x[j] - x[i] * w_ij);
                payload[static_cast<std::size_t>(r) * ell + c] =
                    gate * (hebb + oja) * inv - rates.eta_d * w_ij;
            }
        }
        if (bi == bj && w.masks_self_connections())
            for (int d = 0; d < ell; ++d) payload[static_cast<std::size_t>(d) * ell + d] = 0.0;
        if (rates.norm_projection) norm_project(payload, rates.norm_cap);
        delta.insert_block(bi, bj, payload);
    });
    return delta;
}

std::vector<double> homeostatic_bias_update(std::span<const double> a, std::span<const double> x,
                                            const PlasticityRates& rates) {
    if (a.size() != x.size()) throw std::invalid_argument("homeostatic_bias_update: dimension mismatch");
    const double inv = 1.0 / rates.nlms_divisor(squared_norm(x));
    std::vector<double> db(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) db[j] = rates.eta_b * (rates.p_star - a[j]) * inv;
    return db;
}

void apply_block_delta(BlockSparseMatrix& w, const BlockSparseMatrix& delta, const PlasticityRates& rates) {
    w.for_each_block([&](int i, int j, std::span<double> blk) {
        std::span<const double> d = delta.block(i, j);
        for (std::size_t k = 0; k < blk.size(); ++k) blk[k] += d[k];
        if (rates.norm_projection) norm_project(blk, rates.norm_cap);
    });
    w.zero_self_connections();
}

} // namespace trophic
