#pragma once

// DSM1 binary matrix files.
//
// Layout (all integers little-endian u64, values little-endian IEEE f64):
//   "DSM1" | n_rows | n_cols | nnz | row_start[n_rows+1] | col_index[nnz] | value[nnz]
// Only the row form is stored; the column copy is rebuilt on load.

#include <array>
#include <limits>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "prsparse/sparse.hpp"

namespace prsparse {

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf{};
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  os.write(buf.data(), buf.size());
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!is) throw std::runtime_error("DSM1: truncated file");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | buf[b];
  return v;
}

}  // namespace detail

inline constexpr std::array<char, 4> kDsmMagic{'D', 'S', 'M', '1'};

inline void write_dsm(std::ostream& os, const DualSparseMatrix& m) {
  const auto& c = m.by_rows();
  os.write(kDsmMagic.data(), kDsmMagic.size());
  detail::put_u64(os, c.n_rows());
  detail::put_u64(os, c.n_cols());
  detail::put_u64(os, c.nnz());
  for (const auto v : c.row_start()) detail::put_u64(os, v);
  for (const auto v : c.col_index()) detail::put_u64(os, v);
  for (const double v : c.values()) detail::put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw std::runtime_error("DSM1: write failed");
}

inline DualSparseMatrix read_dsm(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kDsmMagic) throw std::runtime_error("DSM1: bad magic");
  const auto n_rows = detail::get_u64(is);
  const auto n_cols = detail::get_u64(is);
  const auto nnz = detail::get_u64(is);
  constexpr std::uint64_t kMaxDim = std::numeric_limits<index_t>::max();
  if (n_rows > kMaxDim || n_cols > kMaxDim || nnz > n_rows * n_cols)
    throw std::runtime_error("DSM1: header dimensions out of range");
  std::vector<std::uint64_t> start(n_rows + 1);
  for (auto& v : start) v = detail::get_u64(is);
  std::vector<index_t> cols(nnz);
  for (auto& v : cols) {
    const auto c = detail::get_u64(is);
    if (c >= n_cols) throw std::runtime_error("DSM1: column index out of range");
    v = static_cast<index_t>(c);
  }
  std::vector<double> vals(nnz);
  for (auto& v : vals) v = std::bit_cast<double>(detail::get_u64(is));
  try {
    return DualSparseMatrix(
        CsrMatrix(n_rows, n_cols, std::move(start), std::move(cols), std::move(vals)));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("DSM1: ") + e.what());
  }
}

inline void save_dsm(const std::string& path, const DualSparseMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dsm(os, m);
}

inline DualSparseMatrix load_dsm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dsm(is);
}

}  // namespace prsparse
