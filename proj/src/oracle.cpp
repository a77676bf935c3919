#include "trophic/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace trophic::oracle {

namespace {

constexpr double kClamp = 1.0 - 1e-9;

// Shared forward replay: recomputes pre-activations, tanh values and clamp
// masks for every step and checks the replayed states against the recording.
struct Replay {
    std::vector<std::vector<double>> h;     // tanh(z_t)
    std::vector<std::vector<double>> cmask; // 1 where the clamp was inactive
};

Replay replay_forward(const Trajectory& traj, const BlockSparseMatrix& w, const DenseMatrix& w_in,
                      std::span<const double> b) {
    const int n = w.layout().neurons();
    const int T = traj.steps();
    if (static_cast<int>(traj.x0.size()) != n) throw std::invalid_argument("trajectory/network size mismatch");

    Replay rp;
    rp.h.resize(T);
    rp.cmask.resize(T);
    std::vector<double> x = traj.x0;
    std::vector<double> pre(n), drive(n);
    for (int t = 0; t < T; ++t) {
        w.matvec_transpose(x, pre);
        if (w_in.rows > 0) {
            w_in.matvec(traj.u[t], drive);
            for (int i = 0; i < n; ++i) pre[i] += drive[i];
        }
        rp.h[t].resize(n);
        rp.cmask[t].assign(n, 1.0);
        for (int i = 0; i < n; ++i) {
            const double h = std::tanh(pre[i] + b[i]);
            rp.h[t][i] = h;
            double v = traj.params.alpha_fast * x[i] + (1.0 - traj.params.alpha_fast) * h +
                       noise_sample(traj.noise_seed, traj.start_step + static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(i), traj.params.noise_sigma);
            if (v > kClamp) { v = kClamp; rp.cmask[t][i] = 0.0; }
            if (v < -kClamp) { v = -kClamp; rp.cmask[t][i] = 0.0; }
            if (std::abs(v - traj.x[t][i]) > 1e-12)
                throw std::runtime_error("oracle replay diverged from recorded trajectory at step " +
                                         std::to_string(t) + ", neuron " + std::to_string(i));
            x[i] = v;
        }
    }
    return rp;
}

std::vector<double> readout_delta(const DenseMatrix& readout, std::span<const double> x,
                                  std::span<const double> y) {
    std::vector<double> d(readout.rows, 0.0);
    readout.matvec(x, d);
    for (int k = 0; k < readout.rows; ++k) d[k] -= y[k];
    return d;
}

} // namespace

double trajectory_loss(const Trajectory& traj, const BlockSparseMatrix& w, const DenseMatrix& w_in,
                       std::span<const double> b, const DenseMatrix& readout) {
    const int n = w.layout().neurons();
    const int T = traj.steps();
    std::vector<double> x = traj.x0;
    std::vector<double> pre(n), drive(n);
    double loss = 0.0;
    for (int t = 0; t < T; ++t) {
        w.matvec_transpose(x, pre);
        if (w_in.rows > 0) {
            w_in.matvec(traj.u[t], drive);
            for (int i = 0; i < n; ++i) pre[i] += drive[i];
        }
        for (int i = 0; i < n; ++i) {
            double v = traj.params.alpha_fast * x[i] +
                       (1.0 - traj.params.alpha_fast) * std::tanh(pre[i] + b[i]) +
                       noise_sample(traj.noise_seed, traj.start_step + static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(i), traj.params.noise_sigma);
            x[i] = std::clamp(v, -kClamp, kClamp);
        }
        const std::vector<double> d = readout_delta(readout, x, traj.y[t]);
        loss += 0.5 * squared_norm(d);
    }
    return loss / static_cast<double>(T);
}

namespace {

// Reverse pass shared by the synapse-level and block-level oracles. emit is
// called once per step (from t = T down to 1) with the adjoint of the
// pre-activation s_t and the previous state x_{t-1}; the full gradient
// contribution of that step is s_t x_{t-1}^T in (post, pre) order, i.e.
// dL/dM(k,l) += s_t(l) x_{t-1}(k).
template <typename Emit>
void bptt_reverse(const Trajectory& traj, const BlockSparseMatrix& w, const DenseMatrix& w_in,
                  std::span<const double> b, const DenseMatrix& readout, Emit&& emit) {
    const int n = w.layout().neurons();
    const int T = traj.steps();
    if (T == 0) return;
    if (n > 4096) throw std::runtime_error("bptt: dense oracle guard exceeded (N > 4096)");
    if (T > 512) throw std::runtime_error("bptt: trajectory guard exceeded (T > 512)");

    const Replay rp = replay_forward(traj, w, w_in, b);
    const double af = traj.params.alpha_fast;
    const double invT = 1.0 / static_cast<double>(T);

    std::vector<double> adj(n, 0.0);   // dL/dx_t
    std::vector<double> s(n, 0.0);     // dL/dz_t
    std::vector<double> carry(n, 0.0); // M s = D^T s
    for (int t = T - 1; t >= 0; --t) {
        const std::vector<double> d = readout_delta(readout, traj.x[t], traj.y[t]);
        std::vector<double> direct(n, 0.0);
        readout.matvec_transpose(d, direct);
        for (int i = 0; i < n; ++i) adj[i] += direct[i] * invT;

        for (int i = 0; i < n; ++i) {
            const double ac = adj[i] * rp.cmask[t][i];
            s[i] = (1.0 - af) * (1.0 - rp.h[t][i] * rp.h[t][i]) * ac;
            adj[i] = af * ac; // alpha-path into x_{t-1}
        }
        const std::span<const double> x_prev = t > 0 ? std::span<const double>(traj.x[t - 1])
                                                     : std::span<const double>(traj.x0);
        emit(t, std::span<const double>(s), x_prev);
        w.matvec(s, carry); // D^T s under drive D = M^T
        for (int i = 0; i < n; ++i) adj[i] += carry[i];
    }
}

} // namespace

std::vector<double> bptt_synapse_gradients(const Trajectory& traj, const BlockSparseMatrix& w,
                                           const DenseMatrix& w_in, std::span<const double> b,
                                           const DenseMatrix& readout) {
    const int n = w.layout().neurons();
    std::vector<double> grad(static_cast<std::size_t>(n) * n, 0.0);
    bptt_reverse(traj, w, w_in, b, readout,
                 [&](int, std::span<const double> s, std::span<const double> x_prev) {
                     for (int k = 0; k < n; ++k) {
                         const double xk = x_prev[k];
                         if (xk == 0.0) continue;
                         double* row = grad.data() + static_cast<std::size_t>(k) * n;
                         for (int l = 0; l < n; ++l) row[l] += xk * s[l];
                     }
                 });
    return grad;
}

std::vector<double> bptt_block_gradients(const Trajectory& traj, const BlockSparseMatrix& w,
                                         const DenseMatrix& w_in, std::span<const double> b,
                                         const DenseMatrix& readout) {
    const int B = w.layout().blocks;
    const int ell = w.layout().block_size;
    const int T = traj.steps();
    std::vector<double> g(static_cast<std::size_t>(B) * B, 0.0);
    std::vector<double> xs(B), ss(B);
    bptt_reverse(traj, w, w_in, b, readout,
                 [&](int, std::span<const double> s, std::span<const double> x_prev) {
                     for (int m = 0; m < B; ++m) {
                         double sx = 0.0, sv = 0.0;
                         for (int k = 0; k < ell; ++k) {
                             sx += x_prev[static_cast<std::size_t>(m) * ell + k];
                             sv += s[static_cast<std::size_t>(m) * ell + k];
                         }
                         xs[m] = sx;
                         ss[m] = sv;
                     }
                     for (int i = 0; i < B; ++i)
                         for (int j = 0; j < B; ++j)
                             g[static_cast<std::size_t>(i) * B + j] += std::abs(xs[i] * ss[j]);
                 });
    if (T > 0)
        for (double& v : g) v /= static_cast<double>(T);
    return g;
}

std::vector<double> local_heuristic(const Trajectory& traj, const BlockLayout& layout,
                                    bool analytic_variant) {
    const int B = layout.blocks;
    const int ell = layout.block_size;
    const int T = traj.steps();
    std::vector<double> h(static_cast<std::size_t>(B) * B, 0.0);
    std::vector<double> trc_bar(B), eps_bar(B);
    const auto& errs = analytic_variant ? traj.eps_gated_analytic : traj.eps_gated;
    for (int t = 0; t < T; ++t) {
        for (int m = 0; m < B; ++m) {
            double st = 0.0, se = 0.0;
            for (int k = 0; k < ell; ++k) {
                st += traj.trc[t][static_cast<std::size_t>(m) * ell + k];
                se += errs[t][static_cast<std::size_t>(m) * ell + k];
            }
            trc_bar[m] = st / ell;
            eps_bar[m] = se / ell;
        }
        for (int i = 0; i < B; ++i)
            for (int j = 0; j < B; ++j)
                h[static_cast<std::size_t>(i) * B + j] += std::abs(trc_bar[i] * eps_bar[j]);
    }
    if (T > 0)
        for (double& v : h) v /= static_cast<double>(T);
    return h;
}

std::vector<std::pair<int, int>> synapse_index(const BlockSparseMatrix& w) {
    const int ell = w.layout().block_size;
    std::vector<std::pair<int, int>> idx;
    idx.reserve(static_cast<std::size_t>(w.occupied_count()) * ell * ell);
    w.for_each_block([&](int bi, int bj, std::span<const double>) {
        for (int r = 0; r < ell; ++r)
            for (int c = 0; c < ell; ++c) idx.emplace_back(bi * ell + r, bj * ell + c);
    });
    return idx;
}

std::vector<double> forward_eprop_exact(const Trajectory& traj, const BlockSparseMatrix& w,
                                        const DenseMatrix& w_in, std::span<const double> b,
                                        const DenseMatrix& readout) {
    const int n = w.layout().neurons();
    const int T = traj.steps();
    if (n > 1024) throw std::runtime_error("forward_eprop_exact: guard exceeded (N > 1024)");
    if (T > 64) throw std::runtime_error("forward_eprop_exact: guard exceeded (T > 64)");

    const Replay rp = replay_forward(traj, w, w_in, b);
    const double af = traj.params.alpha_fast;
    const double invT = 1.0 / static_cast<double>(std::max(1, T));

    // dL_t/dx per step, reused across synapses
    std::vector<std::vector<double>> glocal(T, std::vector<double>(n, 0.0));
    for (int t = 0; t < T; ++t) {
        const std::vector<double> d = readout_delta(readout, traj.x[t], traj.y[t]);
        readout.matvec_transpose(d, glocal[t]);
        for (int i = 0; i < n; ++i) glocal[t][i] *= invT;
    }

    const auto synapses = synapse_index(w);
    std::vector<double> grads(synapses.size(), 0.0);
    std::vector<double> sens(n), prop(n);
    for (std::size_t si = 0; si < synapses.size(); ++si) {
        const int k = synapses[si].first;
        const int l = synapses[si].second;
        std::fill(sens.begin(), sens.end(), 0.0);
        double acc = 0.0;
        for (int t = 0; t < T; ++t) {
            const std::span<const double> x_prev =
                t > 0 ? std::span<const double>(traj.x[t - 1]) : std::span<const double>(traj.x0);
            w.matvec_transpose(sens, prop); // dz = D sens + e_l x_prev[k]
            prop[l] += x_prev[k];
            for (int i = 0; i < n; ++i) {
                const double gate = (1.0 - af) * (1.0 - rp.h[t][i] * rp.h[t][i]);
                sens[i] = rp.cmask[t][i] * (af * sens[i] + gate * prop[i]);
            }
            acc += dot(glocal[t], sens);
        }
        grads[si] = acc;
    }
    return grads;
}

std::vector<double> diagonal_approx(const Trajectory& traj, const BlockSparseMatrix& w,
                                    const DenseMatrix& readout, bool jacobian_gate) {
    const int n = w.layout().neurons();
    const int T = traj.steps();
    const double invT = 1.0 / static_cast<double>(std::max(1, T));
    const auto synapses = synapse_index(w);
    std::vector<double> est(synapses.size(), 0.0);

    std::vector<double> m(n, 0.0), glocal(n, 0.0);
    for (int t = 0; t < T; ++t) {
        const std::span<const double> x_prev =
            t > 0 ? std::span<const double>(traj.x[t - 1]) : std::span<const double>(traj.x0);
        for (int i = 0; i < n; ++i)
            m[i] = traj.params.alpha_elig * m[i] + (1.0 - traj.params.alpha_fast) * x_prev[i];
        const std::vector<double> d = readout_delta(readout, traj.x[t], traj.y[t]);
        readout.matvec_transpose(d, glocal);
        for (std::size_t si = 0; si < synapses.size(); ++si) {
            const int k = synapses[si].first;
            const int l = synapses[si].second;
            const double gate = jacobian_gate ? 1.0 - traj.x[t][l] * traj.x[t][l] : 1.0;
            est[si] += glocal[l] * invT * gate * m[k];
        }
    }
    return est;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

CreditComparison compare(std::span<const double> a, std::span<const double> b, double k_fraction) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("compare: size mismatch");
    const std::size_t n = a.size();
    CreditComparison out;

    const double r = pearson(a, b);
    if (std::isfinite(r)) out.pearson = r;

    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double rs = pearson(ra, rb);
    if (std::isfinite(rs)) out.spearman = rs;

    const double na = norm2(a), nb = norm2(b);
    if (na > 0.0 && nb > 0.0) out.cosine = dot(a, b) / (na * nb);

    // ranking metrics on magnitudes, positives = top-k of |b|
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(k_fraction * n)));
    if (k < n) {
        std::vector<double> absa(n), absb(n);
        for (std::size_t i = 0; i < n; ++i) {
            absa[i] = std::abs(a[i]);
            absb[i] = std::abs(b[i]);
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            if (absb[i] != absb[j]) return absb[i] > absb[j];
            return i < j;
        });
        std::vector<char> positive(n, 0);
        for (std::size_t i = 0; i < k; ++i) positive[order[i]] = 1;

        const std::vector<double> score_ranks = average_ranks(absa);
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (positive[i]) rank_sum += score_ranks[i];
        const double n_pos = static_cast<double>(k);
        const double n_neg = static_cast<double>(n - k);
        out.auroc = (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);

        std::vector<std::size_t> order_a(n);
        std::iota(order_a.begin(), order_a.end(), 0);
        std::sort(order_a.begin(), order_a.end(), [&](std::size_t i, std::size_t j) {
            if (absa[i] != absa[j]) return absa[i] > absa[j];
            return i < j;
        });
        std::size_t hits = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (positive[order_a[i]]) ++hits;
        out.precision_at_k = static_cast<double>(hits) / n_pos;
    }
    return out;
}

} // namespace trophic::oracle
