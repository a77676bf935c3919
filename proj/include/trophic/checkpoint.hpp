#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trophic/block_sparse.hpp"
#include "trophic/dynamics.hpp"
#include "trophic/linalg.hpp"

namespace trophic::checkpoint {

// Binary snapshot layout (all integers and doubles little-endian):
//   magic "TRPHCKP1", u32 version,
//   weights:  u32 B, u32 ell, u32 c_max, u8 mask_self,
//             per row: u32 count, u32 cols[count]; then blocks as f64[ell*ell]
//   state:    u32 N, f64 x[N], f64 trc[N], f64 a[N], u64 step, u64 seed
// Callers append further sections (heads, trophic map, trainer scalars) with
// the same primitives.

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_f64_vec(std::ostream& out, const std::vector<double>& v);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::vector<double> read_f64_vec(std::istream& in);

void write_header(std::ostream& out);
void read_header(std::istream& in); // throws on bad magic/version

void write_matrix(std::ostream& out, const BlockSparseMatrix& m);
BlockSparseMatrix read_matrix(std::istream& in);

void write_state(std::ostream& out, const NetworkState& s);
NetworkState read_state(std::istream& in);

void write_dense(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_dense(std::istream& in);

} // namespace trophic::checkpoint
