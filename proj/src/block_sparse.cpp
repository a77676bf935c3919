#include "trophic/block_sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trophic {

void BlockLayout::validate() const {
    if (blocks < 1) throw std::invalid_argument("BlockLayout: blocks must be >= 1");
    if (block_size < 1) throw std::invalid_argument("BlockLayout: block_size must be >= 1");
    if (max_row_blocks < 1 || max_row_blocks > blocks)
        throw std::invalid_argument("BlockLayout: max_row_blocks must be in [1, blocks]");
}

BlockSparseMatrix::BlockSparseMatrix(BlockLayout layout, bool mask_self)
    : layout_(layout), mask_self_(mask_self), cols_(layout.blocks), data_(layout.blocks) {
    layout_.validate();
}

int BlockSparseMatrix::occupied_count() const {
    int n = 0;
    for (const auto& c : cols_) n += static_cast<int>(c.size());
    return n;
}

int BlockSparseMatrix::find_col(int i, int j) const {
    const auto& c = cols_[i];
    auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return -1;
    return static_cast<int>(it - c.begin());
}

bool BlockSparseMatrix::occupied(int i, int j) const {
    if (i < 0 || i >= layout_.blocks || j < 0 || j >= layout_.blocks) return false;
    return find_col(i, j) >= 0;
}

std::vector<std::pair<int, int>> BlockSparseMatrix::occupied_blocks() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(occupied_count());
    for (int i = 0; i < layout_.blocks; ++i)
        for (int j : cols_[i]) out.emplace_back(i, j);
    return out;
}

std::span<double> BlockSparseMatrix::block(int i, int j) {
    const int k = find_col(i, j);
    if (k < 0) throw std::invalid_argument("block(" + std::to_string(i) + "," + std::to_string(j) + ") is unoccupied");
    return data_[i][k];
}

std::span<const double> BlockSparseMatrix::block(int i, int j) const {
    const int k = find_col(i, j);
    if (k < 0) throw std::invalid_argument("block(" + std::to_string(i) + "," + std::to_string(j) + ") is unoccupied");
    return data_[i][k];
}

void BlockSparseMatrix::insert_block(int i, int j, std::span<const double> values) {
    const int B = layout_.blocks;
    const int ell = layout_.block_size;
    if (i < 0 || i >= B || j < 0 || j >= B)
        throw std::invalid_argument("insert_block: block index out of range");
    if (static_cast<int>(values.size()) != ell * ell)
        throw std::invalid_argument("insert_block: payload size mismatch");
    if (find_col(i, j) >= 0)
        throw std::invalid_argument("insert_block: block already occupied");
    if (row_occupancy(i) >= layout_.max_row_blocks)
        throw std::invalid_argument("insert_block: row " + std::to_string(i) + " is at max_row_blocks");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("insert_block: non-finite entry");

    std::vector<double> payload(values.begin(), values.end());
    if (mask_self_ && i == j)
        for (int d = 0; d < ell; ++d) payload[static_cast<std::size_t>(d) * ell + d] = 0.0;

    auto it = std::lower_bound(cols_[i].begin(), cols_[i].end(), j);
    const auto pos = it - cols_[i].begin();
    cols_[i].insert(it, j);
    data_[i].insert(data_[i].begin() + pos, std::move(payload));
}

void BlockSparseMatrix::remove_block(int i, int j) {
    if (i < 0 || i >= layout_.blocks || j < 0 || j >= layout_.blocks)
        throw std::invalid_argument("remove_block: block index out of range");
    const int k = find_col(i, j);
    if (k < 0) throw std::invalid_argument("remove_block: block is unoccupied");
    cols_[i].erase(cols_[i].begin() + k);
    data_[i].erase(data_[i].begin() + k);
}

void BlockSparseMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    const int N = layout_.neurons();
    const int ell = layout_.block_size;
    if (static_cast<int>(x.size()) != N || static_cast<int>(y.size()) != N)
        throw std::invalid_argument("matvec: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < layout_.blocks; ++i) {
        double* yi = y.data() + static_cast<std::size_t>(i) * ell;
        for (std::size_t k = 0; k < cols_[i].size(); ++k) {
            const double* xj = x.data() + static_cast<std::size_t>(cols_[i][k]) * ell;
            const double* blk = data_[i][k].data();
            for (int r = 0; r < ell; ++r) {
                double acc = 0.0;
                const double* row = blk + static_cast<std::size_t>(r) * ell;
                for (int c = 0; c < ell; ++c) acc += row[c] * xj[c];
                yi[r] += acc;
            }
        }
    }
}

void BlockSparseMatrix::matvec_transpose(std::span<const double> x, std::span<double> y) const {
    const int N = layout_.neurons();
    const int ell = layout_.block_size;
    if (static_cast<int>(x.size()) != N || static_cast<int>(y.size()) != N)
        throw std::invalid_argument("matvec_transpose: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < layout_.blocks; ++i) {
        const double* xi = x.data() + static_cast<std::size_t>(i) * ell;
        for (std::size_t k = 0; k < cols_[i].size(); ++k) {
            double* yj = y.data() + static_cast<std::size_t>(cols_[i][k]) * ell;
            const double* blk = data_[i][k].data();
            for (int r = 0; r < ell; ++r) {
                const double xr = xi[r];
                if (xr == 0.0) continue;
                const double* row = blk + static_cast<std::size_t>(r) * ell;
                for (int c = 0; c < ell; ++c) yj[c] += row[c] * xr;
            }
        }
    }
}

std::vector<double> BlockSparseMatrix::block_frobenius_norms() const {
    const int B = layout_.blocks;
    std::vector<double> out(static_cast<std::size_t>(B) * B, 0.0);
    for_each_block([&](int i, int j, std::span<const double> blk) {
        double s = 0.0;
        for (double v : blk) s += v * v;
        out[static_cast<std::size_t>(i) * B + j] = std::sqrt(s);
    });
    return out;
}

std::vector<double> BlockSparseMatrix::to_dense(int max_neurons) const {
    const int N = layout_.neurons();
    const int ell = layout_.block_size;
    if (N > max_neurons)
        throw std::runtime_error("to_dense: " + std::to_string(N) + " neurons exceeds guard of " +
                                 std::to_string(max_neurons));
    std::vector<double> dense(static_cast<std::size_t>(N) * N, 0.0);
    for_each_block([&](int i, int j, std::span<const double> blk) {
        for (int r = 0; r < ell; ++r)
            for (int c = 0; c < ell; ++c)
                dense[static_cast<std::size_t>(i * ell + r) * N + (j * ell + c)] =
                    blk[static_cast<std::size_t>(r) * ell + c];
    });
    return dense;
}

void BlockSparseMatrix::zero_self_connections() {
    if (!mask_self_) return;
    const int ell = layout_.block_size;
    for_each_block([&](int i, int j, std::span<double> blk) {
        if (i != j) return;
        for (int d = 0; d < ell; ++d) blk[static_cast<std::size_t>(d) * ell + d] = 0.0;
    });
}

double BlockSparseMatrix::density() const {
    return static_cast<double>(occupied_count()) /
           (static_cast<double>(layout_.blocks) * layout_.max_row_blocks);
}

bool BlockSparseMatrix::operator==(const BlockSparseMatrix& other) const {
    return layout_.blocks == other.layout_.blocks && layout_.block_size == other.layout_.block_size &&
           layout_.max_row_blocks == other.layout_.max_row_blocks && cols_ == other.cols_ &&
           data_ == other.data_;
}

} // namespace trophic
