#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/rng.hpp"

using namespace trophic;

namespace {

std::vector<double> random_vector(int n, std::uint64_t seed) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = rng::gaussian(seed, i, 0);
    return v;
}

BlockSparseMatrix random_matrix(BlockLayout layout, int blocks_per_row, std::uint64_t seed,
                                bool mask_self = true) {
    BlockSparseMatrix m(layout, mask_self);
    const int ell = layout.block_size;
    std::vector<double> payload(ell * ell);
    for (int i = 0; i < layout.blocks; ++i)
        for (int k = 0; k < blocks_per_row; ++k) {
            const int j = static_cast<int>(rng::mix3(seed, i, k) % layout.blocks);
            if (m.occupied(i, j) || m.row_occupancy(i) >= layout.max_row_blocks) continue;
            for (int e = 0; e < ell * ell; ++e) payload[e] = rng::gaussian(seed ^ 0xb10c, i * 131 + j, e);
            m.insert_block(i, j, payload);
        }
    return m;
}

std::vector<double> dense_matvec(const std::vector<double>& dense, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> y(n, 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) y[r] += dense[static_cast<std::size_t>(r) * n + c] * x[c];
    return y;
}

} // namespace

TEST_CASE("matvec on empty occupancy gives zero") {
    BlockSparseMatrix m({4, 3, 2});
    std::vector<double> x(12, 1.5), y(12, 99.0);
    m.matvec(x, y);
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("identity diagonal blocks reproduce x when masking disabled") {
    BlockLayout layout{3, 4, 3};
    BlockSparseMatrix masked(layout, true);
    BlockSparseMatrix unmasked(layout, false);
    std::vector<double> eye(16, 0.0);
    for (int d = 0; d < 4; ++d) eye[d * 4 + d] = 1.0;
    for (int b = 0; b < 3; ++b) {
        masked.insert_block(b, b, eye);
        unmasked.insert_block(b, b, eye);
    }
    const std::vector<double> x = random_vector(12, 3);
    std::vector<double> y(12);
    unmasked.matvec(x, y);
    for (int i = 0; i < 12; ++i) CHECK(y[i] == doctest::Approx(x[i]));
    masked.matvec(x, y);
    for (double v : y) CHECK(v == 0.0); // identity lived entirely on masked entries
}

TEST_CASE("matvec and transpose matvec agree with the dense oracle") {
    BlockLayout layout{4, 5, 3};
    const BlockSparseMatrix m = random_matrix(layout, 3, 11);
    const std::vector<double> x = random_vector(layout.neurons(), 17);
    const std::vector<double> dense = m.to_dense();

    std::vector<double> y(layout.neurons());
    m.matvec(x, y);
    std::vector<double> expect = dense_matvec(dense, x);
    for (int i = 0; i < layout.neurons(); ++i)
        CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-12));

    // transpose route
    std::vector<double> dense_t(dense.size());
    const int n = layout.neurons();
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) dense_t[static_cast<std::size_t>(r) * n + c] = dense[static_cast<std::size_t>(c) * n + r];
    m.matvec_transpose(x, y);
    expect = dense_matvec(dense_t, x);
    for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("block frobenius norms") {
    BlockLayout layout{3, 2, 3};
    BlockSparseMatrix m(layout);
    CHECK(m.block_frobenius_norms() == std::vector<double>(9, 0.0));

    m.insert_block(0, 1, std::vector<double>(4, 1.0)); // sqrt(4) = 2
    const auto norms = m.block_frobenius_norms();
    CHECK(norms[1] == doctest::Approx(2.0));

    const BlockSparseMatrix r = random_matrix({4, 3, 2}, 2, 5);
    const auto rn = r.block_frobenius_norms();
    const auto dense = r.to_dense();
    const int n = r.layout().neurons();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double v = dense[static_cast<std::size_t>(i * 3 + a) * n + (j * 3 + b)];
                    s += v * v;
                }
            CHECK(rn[i * 4 + j] == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
        }
}

TEST_CASE("insert then remove restores the original matrix") {
    const BlockSparseMatrix orig = random_matrix({4, 3, 3}, 2, 23);
    BlockSparseMatrix m = orig;
    int i = -1, j = -1;
    for (int a = 0; a < 4 && i < 0; ++a)
        for (int b = 0; b < 4 && i < 0; ++b)
            if (!m.occupied(a, b) && m.row_occupancy(a) < 3) { i = a; j = b; }
    REQUIRE(i >= 0);
    m.insert_block(i, j, std::vector<double>(9, 0.5));
    m.remove_block(i, j);
    CHECK(m == orig);
}

TEST_CASE("insert rejections") {
    BlockLayout layout{3, 2, 1};
    BlockSparseMatrix m(layout);
    m.insert_block(0, 1, std::vector<double>(4, 1.0));
    CHECK_THROWS_AS(m.insert_block(0, 2, std::vector<double>(4, 1.0)), std::invalid_argument); // c_max
    CHECK_THROWS_AS(m.insert_block(0, 1, std::vector<double>(4, 1.0)), std::invalid_argument); // occupied
    CHECK_THROWS_AS(m.remove_block(1, 1), std::invalid_argument);                              // absent
}

TEST_CASE("diagonal insertion masks self connections entrywise") {
    BlockLayout layout{2, 3, 2};
    BlockSparseMatrix m(layout);
    m.insert_block(1, 1, std::vector<double>(9, 1.0));
    const auto blk = m.block(1, 1);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(blk[r * 3 + c] == (r == c ? 0.0 : 1.0));
}

TEST_CASE("row occupancy never exceeds c_max under a random op sequence") {
    BlockLayout layout{5, 2, 2};
    BlockSparseMatrix m(layout);
    std::vector<double> payload(4, 0.25);
    for (int step = 0; step < 300; ++step) {
        const int i = static_cast<int>(rng::mix3(99, step, 0) % 5);
        const int j = static_cast<int>(rng::mix3(99, step, 1) % 5);
        if (m.occupied(i, j))
            m.remove_block(i, j);
        else if (m.row_occupancy(i) < layout.max_row_blocks)
            m.insert_block(i, j, payload);
        for (int r = 0; r < 5; ++r) CHECK(m.row_occupancy(r) <= layout.max_row_blocks);
        if (m.occupied(2, 2)) {
            const auto blk = m.block(2, 2);
            CHECK(blk[0] == 0.0);
            CHECK(blk[3] == 0.0);
        }
    }
}

TEST_CASE("to_dense round trip and size guard") {
    const BlockSparseMatrix m = random_matrix({3, 4, 2}, 2, 31);
    const std::vector<double> x = random_vector(12, 7);
    std::vector<double> y(12);
    m.matvec(x, y);
    const auto expect = dense_matvec(m.to_dense(), x);
    for (int i = 0; i < 12; ++i) CHECK(y[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    CHECK_THROWS_AS(m.to_dense(4), std::runtime_error);
}

TEST_CASE("density counts against the row budget") {
    BlockLayout layout{4, 2, 2};
    BlockSparseMatrix m(layout);
    CHECK(m.density() == 0.0);
    m.insert_block(0, 1, std::vector<double>(4, 1.0));
    m.insert_block(2, 3, std::vector<double>(4, 1.0));
    CHECK(m.density() == doctest::Approx(2.0 / 8.0));
}
