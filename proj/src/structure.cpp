#include "trophic/structure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trophic/rng.hpp"

namespace trophic {

double TrophicFieldMap::max_value() const {
    double m = 0.0;
    for (double v : t) m = std::max(m, v);
    return m;
}

void tfm_update(TrophicFieldMap& tfm, std::span<const double> trc, std::span<const double> eps_gated,
                const BlockLayout& layout) {
    const int B = layout.blocks;
    const int ell = layout.block_size;
    if (tfm.blocks != B) throw std::invalid_argument("tfm_update: layout mismatch");
    if (static_cast<int>(trc.size()) != layout.neurons() || static_cast<int>(eps_gated.size()) != layout.neurons())
        throw std::invalid_argument("tfm_update: signal length mismatch");

    std::vector<double> trc_bar(B, 0.0), eps_bar(B, 0.0);
    for (int b = 0; b < B; ++b) {
        double st = 0.0, se = 0.0;
        for (int k = 0; k < ell; ++k) {
            st += trc[static_cast<std::size_t>(b) * ell + k];
            se += eps_gated[static_cast<std::size_t>(b) * ell + k];
        }
        trc_bar[b] = st / ell;
        eps_bar[b] = se / ell;
    }
    const double a = tfm.alpha;
    for (int m = 0; m < B; ++m)
        for (int n = 0; n < B; ++n)
            tfm.at(m, n) = (1.0 - a) * tfm.at(m, n) + a * std::abs(trc_bar[m] * eps_bar[n]);
}

std::vector<double> viability(const BlockSparseMatrix& w, const TrophicFieldMap& tfm) {
    const int B = w.layout().blocks;
    if (tfm.blocks != B) throw std::invalid_argument("viability: layout mismatch");
    std::vector<double> norms = w.block_frobenius_norms();
    std::vector<double> out(static_cast<std::size_t>(B) * B, 0.0);
    w.for_each_block([&](int i, int j, std::span<const double>) {
        const std::size_t k = static_cast<std::size_t>(i) * B + j;
        out[k] = norms[k] * (1.0 + tfm.at(i, j));
    });
    return out;
}

double modulated_percentile(double density, double ewma_error, const StructuralPolicy& policy) {
    const double p = policy.base_percentile + policy.density_gain * density + policy.error_gain * ewma_error;
    return std::clamp(p, 1.0, 99.0);
}

double percentile_interpolated(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile_interpolated: empty list");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double survival_threshold(const std::vector<double>& viab_values, double density, double ewma_error,
                          const StructuralPolicy& policy) {
    if (viab_values.empty()) throw std::invalid_argument("survival_threshold: no occupied blocks");
    return percentile_interpolated(viab_values, modulated_percentile(density, ewma_error, policy));
}

std::vector<std::pair<int, int>> prune(BlockSparseMatrix& w, const std::vector<double>& viab, double theta) {
    const int B = w.layout().blocks;
    std::vector<std::pair<int, int>> removed;
    for (auto [i, j] : w.occupied_blocks())
        if (viab[static_cast<std::size_t>(i) * B + j] < theta) removed.emplace_back(i, j);
    for (auto [i, j] : removed) w.remove_block(i, j);
    return removed;
}

std::vector<std::pair<int, int>> grow(BlockSparseMatrix& w, const TrophicFieldMap& tfm, double theta,
                                      const StructuralPolicy& policy, std::uint64_t seed) {
    const int B = w.layout().blocks;
    const int ell = w.layout().block_size;
    std::vector<std::pair<int, int>> added;
    if (policy.grow_count_max <= 0) return added;
    const double t_max = tfm.max_value();
    if (t_max <= 0.0) return added;

    // Weighted sampling without replacement (exponential-key method): the
    // candidate with the largest log(u)/weight keys wins with probability
    // proportional to its weight.
    struct Candidate {
        double key;
        int i, j;
        double weight;
    };
    std::vector<Candidate> cands;
    for (int i = 0; i < B; ++i) {
        if (w.row_occupancy(i) >= w.layout().max_row_blocks) continue;
        for (int j = 0; j < B; ++j) {
            if (w.occupied(i, j)) continue;
            const double weight = tfm.at(i, j) / t_max;
            if (weight <= 0.0) continue;
            const double u = rng::uniform(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
            cands.push_back({std::log(u) / weight, i, j, weight});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.key != b.key) return a.key > b.key;
        return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
    });

    std::vector<double> payload(static_cast<std::size_t>(ell) * ell);
    const double sd = policy.init_scale / std::sqrt(static_cast<double>(ell));
    int taken = 0;
    for (const Candidate& c : cands) {
        if (taken >= policy.grow_count_max) break;
        ++taken;
        // estimated viability theta * weight must compete with theta itself
        if (theta * c.weight < theta * policy.admit_quantile) continue;
        if (w.row_occupancy(c.i) >= w.layout().max_row_blocks) continue; // filled earlier this call
        for (int k = 0; k < ell * ell; ++k)
            payload[k] = sd * rng::gaussian(rng::mix2(seed, 0xb10cull),
                                            static_cast<std::uint64_t>(c.i) * B + c.j,
                                            static_cast<std::uint64_t>(k));
        w.insert_block(c.i, c.j, payload);
        added.emplace_back(c.i, c.j);
    }
    return added;
}

StructuralEvent structural_step(BlockSparseMatrix& w, const TrophicFieldMap& tfm, double ewma_error,
                                const StructuralPolicy& policy, std::uint64_t seed, std::uint64_t step) {
    StructuralEvent ev;
    ev.step = step;
    ev.density_before = w.density();
    ev.density_after = ev.density_before;

    const std::vector<double> viab = viability(w, tfm);
    std::vector<double> occupied_viab;
    occupied_viab.reserve(w.occupied_count());
    const int B = w.layout().blocks;
    for (auto [i, j] : w.occupied_blocks()) occupied_viab.push_back(viab[static_cast<std::size_t>(i) * B + j]);
    if (occupied_viab.empty()) return ev;

    ev.percentile = modulated_percentile(ev.density_before, ewma_error, policy);
    ev.theta = percentile_interpolated(occupied_viab, ev.percentile);
    ev.removed = prune(w, viab, ev.theta);
    ev.added = grow(w, tfm, ev.theta, policy, seed);
    ev.density_after = w.density();
    return ev;
}

} // namespace trophic
