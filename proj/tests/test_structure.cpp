#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "trophic/rng.hpp"
#include "trophic/structure.hpp"

using namespace trophic;

TEST_CASE("tfm update") {
    BlockLayout layout{2, 1, 2};
    SUBCASE("alpha 0 leaves T unchanged") {
        TrophicFieldMap tfm(2, 0.0);
        tfm.at(0, 1) = 0.7;
        tfm_update(tfm, std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 4.0}, layout);
        CHECK(tfm.at(0, 1) == 0.7);
    }
    SUBCASE("zero traces decay T") {
        TrophicFieldMap tfm(2, 0.25);
        tfm.at(1, 0) = 1.0;
        tfm_update(tfm, std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, -1.0}, layout);
        CHECK(tfm.at(1, 0) == doctest::Approx(0.75));
    }
    SUBCASE("hand outer product with absolute value") {
        TrophicFieldMap tfm(2, 1.0);
        tfm_update(tfm, std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, -4.0}, layout);
        CHECK(tfm.at(0, 0) == doctest::Approx(3.0));
        CHECK(tfm.at(0, 1) == doctest::Approx(4.0));
        CHECK(tfm.at(1, 0) == doctest::Approx(6.0));
        CHECK(tfm.at(1, 1) == doctest::Approx(8.0));
    }
    SUBCASE("block averaging uses the block means") {
        BlockLayout wide{2, 2, 2};
        TrophicFieldMap tfm(2, 1.0);
        tfm_update(tfm, std::vector<double>{1.0, 3.0, 0.0, 0.0}, std::vector<double>{0.0, 0.0, 2.0, 4.0}, wide);
        CHECK(tfm.at(0, 1) == doctest::Approx(2.0 * 3.0)); // mean trc 2, mean eps 3
    }
    SUBCASE("EMA tracks a stationary stream within O(alpha)") {
        BlockLayout lay{1, 1, 1};
        TrophicFieldMap tfm(1, 1e-2);
        double windowed = 0.0;
        const int steps = 3000;
        for (int t = 0; t < steps; ++t) {
            const double trc = 0.5 + 0.2 * rng::gaussian(4, t, 0);
            const double eps = -0.3 + 0.1 * rng::gaussian(5, t, 0);
            tfm_update(tfm, std::vector<double>{trc}, std::vector<double>{eps}, lay);
            if (t >= steps - 1000) windowed += std::abs(trc * eps);
        }
        windowed /= 1000.0;
        CHECK(tfm.at(0, 0) == doctest::Approx(windowed).epsilon(0.1));
    }
}

TEST_CASE("viability") {
    BlockLayout layout{2, 2, 2};
    BlockSparseMatrix w(layout);
    TrophicFieldMap tfm(2, 0.5);
    SUBCASE("empty matrix gives all zeros") {
        for (double v : viability(w, tfm)) CHECK(v == 0.0);
    }
    SUBCASE("norm times one plus trophic support") {
        w.insert_block(0, 1, std::vector<double>(4, 1.0)); // frobenius 2
        tfm.at(0, 1) = 0.5;
        const auto v = viability(w, tfm);
        CHECK(v[1] == doctest::Approx(3.0));
        CHECK(v[0] == 0.0);
    }
}

TEST_CASE("survival threshold percentile") {
    StructuralPolicy policy;
    SUBCASE("all equal values collapse to that value") {
        policy.base_percentile = 73.0;
        CHECK(survival_threshold({2.5, 2.5, 2.5}, 0.0, 0.0, policy) == doctest::Approx(2.5));
    }
    SUBCASE("median by interpolation") {
        CHECK(percentile_interpolated({1, 2, 3, 4, 5}, 50.0) == doctest::Approx(3.0));
    }
    SUBCASE("percentile 1 sits just above the minimum") {
        CHECK(percentile_interpolated({1, 2, 3, 4, 5}, 1.0) == doctest::Approx(1.04));
    }
    SUBCASE("modulation clamps into [1, 99]") {
        policy.base_percentile = 20.0;
        policy.density_gain = 20.0;
        policy.error_gain = 10.0;
        CHECK(modulated_percentile(0.5, 0.5, policy) == doctest::Approx(35.0));
        CHECK(modulated_percentile(10.0, 10.0, policy) == doctest::Approx(99.0));
        policy.base_percentile = -50.0;
        CHECK(modulated_percentile(0.0, 0.0, policy) == doctest::Approx(1.0));
    }
    SUBCASE("empty viability list is an error") {
        CHECK_THROWS_AS(survival_threshold({}, 0.0, 0.0, policy), std::invalid_argument);
    }
}

TEST_CASE("prune") {
    BlockLayout layout{2, 1, 2};
    BlockSparseMatrix w(layout);
    w.insert_block(0, 1, std::vector<double>{0.1});
    w.insert_block(1, 0, std::vector<double>{0.9});
    w.insert_block(1, 1, std::vector<double>{0.0}); // masked to zero, viability 0
    TrophicFieldMap tfm(2, 0.5);
    const auto viab = viability(w, tfm);

    SUBCASE("theta 0 removes nothing") {
        BlockSparseMatrix copy = w;
        CHECK(prune(copy, viab, 0.0).empty());
        CHECK(copy.occupied_count() == 3);
    }
    SUBCASE("huge theta removes everything") {
        BlockSparseMatrix copy = w;
        const auto removed = prune(copy, viab, 1e18);
        CHECK(removed.size() == 3);
        CHECK(copy.occupied_count() == 0);
    }
    SUBCASE("mixed threshold matches a direct filter") {
        BlockSparseMatrix copy = w;
        const double theta = 0.5;
        std::vector<std::pair<int, int>> expect;
        for (auto [i, j] : w.occupied_blocks())
            if (viab[i * 2 + j] < theta) expect.emplace_back(i, j);
        CHECK(prune(copy, viab, theta) == expect);
    }
}

TEST_CASE("grow") {
    StructuralPolicy policy;
    policy.grow_count_max = 1;
    policy.init_scale = 0.1;

    SUBCASE("zero trophic map means no growth") {
        BlockLayout layout{3, 1, 3};
        BlockSparseMatrix w(layout);
        TrophicFieldMap tfm(3, 0.5);
        CHECK(grow(w, tfm, 1.0, policy, 42).empty());
    }
    SUBCASE("single dominant candidate is admitted") {
        BlockLayout layout{2, 2, 2};
        BlockSparseMatrix w(layout);
        TrophicFieldMap tfm(2, 0.5);
        tfm.at(0, 1) = 2.0; // the max sits on a free site
        const auto added = grow(w, tfm, 1.0, policy, 7);
        REQUIRE(added.size() == 1);
        CHECK(added[0] == std::pair<int, int>{0, 1});
        CHECK(w.occupied(0, 1));
        // payload scale follows init_scale / sqrt(ell)
        double norm = 0.0;
        for (double v : w.block(0, 1)) norm += v * v;
        CHECK(std::sqrt(norm / 4.0) < 0.5);
    }
    SUBCASE("admission gate rejects weak trophic support") {
        BlockLayout layout{2, 1, 2};
        BlockSparseMatrix w(layout);
        TrophicFieldMap tfm(2, 0.5);
        tfm.at(0, 0) = 1.0;  // occupied below; max anchor
        tfm.at(0, 1) = 0.2;  // weight 0.2 < admit_quantile 0.5
        w.insert_block(0, 0, std::vector<double>{0.0});
        policy.grow_count_max = 4;
        const auto added = grow(w, tfm, 1.0, policy, 9);
        for (auto [i, j] : added) CHECK(tfm.at(i, j) / 1.0 >= policy.admit_quantile);
        CHECK(!w.occupied(0, 1));
    }
    SUBCASE("selection frequency follows the trophic weights") {
        // two candidates with weights 0.9 / 0.1; 10k seeded draws
        std::map<std::pair<int, int>, int> counts;
        const int trials = 10000;
        for (int trial = 0; trial < trials; ++trial) {
            BlockLayout layout{2, 1, 2};
            BlockSparseMatrix w(layout);
            TrophicFieldMap tfm(2, 0.5);
            tfm.at(0, 0) = 1.0; // occupied anchor fixes max(T) = 1
            w.insert_block(0, 0, std::vector<double>{0.0});
            tfm.at(0, 1) = 0.9;
            tfm.at(1, 0) = 0.1;
            StructuralPolicy p = policy;
            p.grow_count_max = 1;
            p.admit_quantile = 0.0;
            const auto added = grow(w, tfm, 1.0, p, 1000 + trial);
            REQUIRE(added.size() == 1);
            counts[added[0]]++;
        }
        CHECK(counts[{0, 1}] / static_cast<double>(trials) == doctest::Approx(0.9).epsilon(0.025));
        CHECK(counts[{1, 0}] / static_cast<double>(trials) == doctest::Approx(0.1).scale(1).epsilon(0.25));
    }
    SUBCASE("growth respects c_max") {
        BlockLayout layout{3, 1, 1};
        BlockSparseMatrix w(layout);
        w.insert_block(0, 1, std::vector<double>{0.5}); // row 0 full
        TrophicFieldMap tfm(3, 0.5);
        tfm.at(0, 2) = 1.0; // attractive but row-blocked
        tfm.at(1, 2) = 0.8;
        policy.grow_count_max = 8;
        policy.admit_quantile = 0.0;
        grow(w, tfm, 1.0, policy, 3);
        CHECK(w.row_occupancy(0) == 1);
        CHECK(!w.occupied(0, 2));
    }
}

TEST_CASE("structural step") {
    StructuralPolicy policy;
    SUBCASE("grow_count_max 0 with zero viabilities is a no-op") {
        policy.grow_count_max = 0;
        BlockLayout layout{2, 1, 2};
        BlockSparseMatrix w(layout);
        w.insert_block(1, 1, std::vector<double>{5.0}); // masked to zero
        TrophicFieldMap tfm(2, 0.5);
        const StructuralEvent ev = structural_step(w, tfm, 0.0, policy, 11, 500);
        CHECK(ev.theta == 0.0);
        CHECK(ev.removed.empty());
        CHECK(ev.added.empty());
        CHECK(w.occupied(1, 1));
    }
    SUBCASE("deterministic and idempotent on a stable topology") {
        // stability needs the minimum viability to tie: the percentile clamp
        // (p >= 1) always lands theta strictly above a unique minimum
        BlockLayout layout{3, 2, 2};
        auto build = [&]() {
            BlockSparseMatrix w(layout);
            w.insert_block(0, 1, std::vector<double>(4, 0.9));
            w.insert_block(1, 2, std::vector<double>(4, 0.9));
            w.insert_block(2, 0, std::vector<double>(4, 0.9));
            return w;
        };
        TrophicFieldMap tfm(3, 0.5);
        tfm.at(0, 1) = 1.0;
        tfm.at(1, 2) = 1.0;
        tfm.at(2, 0) = 1.0;
        policy.base_percentile = 5.0;
        policy.grow_count_max = 2; // free sites all carry zero trophic weight
        BlockSparseMatrix w1 = build();
        const StructuralEvent e1 = structural_step(w1, tfm, 0.0, policy, 21, 100);
        BlockSparseMatrix w2 = build();
        const StructuralEvent e2 = structural_step(w2, tfm, 0.0, policy, 21, 100);
        CHECK(e1.theta == e2.theta);
        CHECK(e1.removed == e2.removed);
        CHECK(e1.added == e2.added);
        CHECK(w1 == w2);
        const StructuralEvent e3 = structural_step(w1, tfm, 0.0, policy, 21, 100);
        CHECK(e3.removed.empty());
        CHECK(e3.added.empty());
    }
    SUBCASE("prune happens before grow and the event records both") {
        BlockLayout layout{2, 1, 2};
        BlockSparseMatrix w(layout);
        w.insert_block(0, 1, std::vector<double>{1e-6}); // weak, prunable
        w.insert_block(1, 0, std::vector<double>{2.0});
        TrophicFieldMap tfm(2, 0.5);
        tfm.at(1, 1) = 3.0; // strong free site
        policy.base_percentile = 60.0;
        policy.grow_count_max = 1;
        policy.admit_quantile = 0.5;
        const StructuralEvent ev = structural_step(w, tfm, 0.0, policy, 5, 1000);
        CHECK(ev.removed == std::vector<std::pair<int, int>>{{0, 1}});
        CHECK(ev.added == std::vector<std::pair<int, int>>{{1, 1}});
        CHECK(ev.density_before == doctest::Approx(0.5));
        CHECK(ev.density_after == doctest::Approx(0.5));
    }
}
