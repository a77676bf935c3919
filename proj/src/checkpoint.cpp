#include "trophic/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace trophic::checkpoint {

namespace {
constexpr char kMagic[8] = {'T', 'R', 'P', 'H', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

void write_f64_vec(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

std::vector<double> read_f64_vec(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_header(std::ostream& out) {
    out.write(kMagic, 8);
    write_u32(out, kVersion);
}

void read_header(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("checkpoint: bad magic");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
}

void write_matrix(std::ostream& out, const BlockSparseMatrix& m) {
    const BlockLayout& layout = m.layout();
    write_u32(out, static_cast<std::uint32_t>(layout.blocks));
    write_u32(out, static_cast<std::uint32_t>(layout.block_size));
    write_u32(out, static_cast<std::uint32_t>(layout.max_row_blocks));
    out.put(m.masks_self_connections() ? 1 : 0);
    for (int i = 0; i < layout.blocks; ++i) {
        const auto cols = m.row_columns(i);
        write_u32(out, static_cast<std::uint32_t>(cols.size()));
        for (int j : cols) write_u32(out, static_cast<std::uint32_t>(j));
    }
    m.for_each_block([&](int, int, std::span<const double> blk) {
        out.write(reinterpret_cast<const char*>(blk.data()), static_cast<std::streamsize>(blk.size() * 8));
    });
}

BlockSparseMatrix read_matrix(std::istream& in) {
    BlockLayout layout;
    layout.blocks = static_cast<int>(read_u32(in));
    layout.block_size = static_cast<int>(read_u32(in));
    layout.max_row_blocks = static_cast<int>(read_u32(in));
    const int mask = in.get();
    if (mask < 0) throw std::runtime_error("checkpoint: truncated file");
    BlockSparseMatrix m(layout, mask != 0);

    std::vector<std::vector<int>> cols(layout.blocks);
    for (int i = 0; i < layout.blocks; ++i) {
        const std::uint32_t count = read_u32(in);
        cols[i].resize(count);
        for (std::uint32_t k = 0; k < count; ++k) cols[i][k] = static_cast<int>(read_u32(in));
    }
    const std::size_t payload = static_cast<std::size_t>(layout.block_size) * layout.block_size;
    std::vector<double> blk(payload);
    for (int i = 0; i < layout.blocks; ++i)
        for (int j : cols[i]) {
            in.read(reinterpret_cast<char*>(blk.data()), static_cast<std::streamsize>(payload * 8));
            if (!in) throw std::runtime_error("checkpoint: truncated file");
            m.insert_block(i, j, blk);
        }
    return m;
}

void write_state(std::ostream& out, const NetworkState& s) {
    write_u32(out, static_cast<std::uint32_t>(s.x.size()));
    write_f64_vec(out, s.x);
    write_f64_vec(out, s.trc);
    write_f64_vec(out, s.a);
    write_u64(out, s.step);
    write_u64(out, s.noise_seed);
}

NetworkState read_state(std::istream& in) {
    NetworkState s;
    read_u32(in); // N, implied by the vectors
    s.x = read_f64_vec(in);
    s.trc = read_f64_vec(in);
    s.a = read_f64_vec(in);
    s.step = read_u64(in);
    s.noise_seed = read_u64(in);
    return s;
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
    write_u32(out, static_cast<std::uint32_t>(m.rows));
    write_u32(out, static_cast<std::uint32_t>(m.cols));
    write_f64_vec(out, m.v);
}

DenseMatrix read_dense(std::istream& in) {
    DenseMatrix m;
    m.rows = static_cast<int>(read_u32(in));
    m.cols = static_cast<int>(read_u32(in));
    m.v = read_f64_vec(in);
    if (m.v.size() != static_cast<std::size_t>(m.rows) * m.cols)
        throw std::runtime_error("checkpoint: dense matrix size mismatch");
    return m;
}

} // namespace trophic::checkpoint
