#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace trophic {

struct BlockLayout {
    int blocks = 1;         // B: block count per side
    int block_size = 1;     // ell: block edge length
    int max_row_blocks = 1; // c_max: occupied-block cap per block row

    int neurons() const { return blocks * block_size; }
    void validate() const;
};

/// Block-sparse square matrix: a B x B grid of dense ell x ell tiles with
/// row-compressed occupancy (sorted column indices per block row).
///
/// Index convention used across the whole project: entry (i, j) is the
/// synapse from neuron i to neuron j, so block row = presynaptic block and
/// block column = postsynaptic block. The recurrent drive of the network is
/// therefore the transposed product, matvec_transpose(x).
///
/// Diagonal tiles carry no self-connections: their diagonal entries are
/// forced to zero at insertion and kept zero by apply_block_delta. Fixtures
/// may construct with mask_self = false to lift this.
class BlockSparseMatrix {
public:
    explicit BlockSparseMatrix(BlockLayout layout, bool mask_self = true);

    const BlockLayout& layout() const { return layout_; }
    bool masks_self_connections() const { return mask_self_; }

    int occupied_count() const;
    bool occupied(int i, int j) const;
    int row_occupancy(int i) const { return static_cast<int>(cols_[i].size()); }
    std::span<const int> row_columns(int i) const { return cols_[i]; }
    std::vector<std::pair<int, int>> occupied_blocks() const;

    std::span<double> block(int i, int j);
    std::span<const double> block(int i, int j) const;

    void insert_block(int i, int j, std::span<const double> values);
    void remove_block(int i, int j);

    // y = M x
    void matvec(std::span<const double> x, std::span<double> y) const;
    // y = M^T x (the network drive under the pre->post convention)
    void matvec_transpose(std::span<const double> x, std::span<double> y) const;

    // B x B row-major map of per-block Frobenius norms; 0 where unoccupied.
    std::vector<double> block_frobenius_norms() const;

    // Dense N x N copy, guarded to keep oracle allocations sane.
    std::vector<double> to_dense(int max_neurons = 4096) const;

    void zero_self_connections();

    // Occupied fraction of the allowed budget B * c_max, in [0, 1].
    double density() const;

    template <typename F>
    void for_each_block(F&& fn) {
        for (int i = 0; i < layout_.blocks; ++i)
            for (std::size_t k = 0; k < cols_[i].size(); ++k)
                fn(i, cols_[i][k], std::span<double>(data_[i][k]));
    }

    template <typename F>
    void for_each_block(F&& fn) const {
        for (int i = 0; i < layout_.blocks; ++i)
            for (std::size_t k = 0; k < cols_[i].size(); ++k)
                fn(i, cols_[i][k], std::span<const double>(data_[i][k]));
    }

    bool operator==(const BlockSparseMatrix& other) const;

private:
    int find_col(int i, int j) const; // index into cols_[i], or -1

    BlockLayout layout_;
    bool mask_self_ = true;
    std::vector<std::vector<int>> cols_;                 // per row, sorted
    std::vector<std::vector<std::vector<double>>> data_; // parallel to cols_
};

} // namespace trophic
