#pragma once

// Compressed sparse row storage, the dual (row + column) layout used by every
// solver, the PageRank operator A = P^T - I and exact residual evaluation.
//
// Values are double precision throughout. The exponential-weight solver in
// particular is sensitive to accumulated rounding, so nothing here is
// templated on the scalar type.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace prsparse {

using index_t = std::uint32_t;
using DenseVector = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Read-only view of one compressed row: parallel column and value spans.
struct SparseRow {
  std::span<const index_t> cols;
  std::span<const double> vals;

  std::size_t size() const { return cols.size(); }
  bool empty() const { return cols.empty(); }
};

class CsrMatrix {
 public:
  CsrMatrix() : row_start_(1, 0) {}

  CsrMatrix(std::size_t n_rows, std::size_t n_cols,
            std::vector<std::uint64_t> row_start, std::vector<index_t> col_index,
            std::vector<double> value)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        row_start_(std::move(row_start)),
        col_index_(std::move(col_index)),
        value_(std::move(value)) {
    validate();
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return value_.size(); }

  SparseRow row(std::size_t i) const {
    const auto b = row_start_[i];
    const auto e = row_start_[i + 1];
    return {std::span<const index_t>(col_index_.data() + b, e - b),
            std::span<const double>(value_.data() + b, e - b)};
  }

  std::size_t row_nnz(std::size_t i) const {
    return static_cast<std::size_t>(row_start_[i + 1] - row_start_[i]);
  }

  /// Value at (i, j), zero when structurally absent. O(log s).
  double at(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.cols.begin(), r.cols.end(),
                                     static_cast<index_t>(j));
    if (it == r.cols.end() || *it != j) return 0.0;
    return r.vals[static_cast<std::size_t>(it - r.cols.begin())];
  }

  const std::vector<std::uint64_t>& row_start() const { return row_start_; }
  const std::vector<index_t>& col_index() const { return col_index_; }
  const std::vector<double>& values() const { return value_; }

  CsrMatrix transposed() const {
    std::vector<std::uint64_t> start(n_cols_ + 1, 0);
    for (const auto c : col_index_) ++start[c + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<index_t> cols(nnz());
    std::vector<double> vals(nnz());
    std::vector<std::uint64_t> cursor(start.begin(), start.end() - 1);
    // Rows are visited in increasing order, so each transposed row comes out
    // sorted without an extra pass.
    for (std::size_t i = 0; i < n_rows_; ++i) {
      for (auto k = row_start_[i]; k < row_start_[i + 1]; ++k) {
        const auto dst = cursor[col_index_[k]]++;
        cols[dst] = static_cast<index_t>(i);
        vals[dst] = value_[k];
      }
    }
    return CsrMatrix(n_cols_, n_rows_, std::move(start), std::move(cols),
                     std::move(vals));
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void validate() const {
    if (n_rows_ > std::numeric_limits<index_t>::max() ||
        n_cols_ > std::numeric_limits<index_t>::max())
      throw std::invalid_argument("CsrMatrix: dimension exceeds index range");
    if (row_start_.size() != n_rows_ + 1 || row_start_.front() != 0 ||
        row_start_.back() != col_index_.size() ||
        col_index_.size() != value_.size())
      throw std::invalid_argument("CsrMatrix: inconsistent array lengths");
    for (std::size_t i = 0; i < n_rows_; ++i) {
      if (row_start_[i] > row_start_[i + 1])
        throw std::invalid_argument("CsrMatrix: row_start decreasing");
      for (auto k = row_start_[i]; k < row_start_[i + 1]; ++k) {
        if (col_index_[k] >= n_cols_)
          throw std::invalid_argument("CsrMatrix: column index out of range");
        if (k > row_start_[i] && col_index_[k] <= col_index_[k - 1])
          throw std::invalid_argument(
              "CsrMatrix: columns not strictly increasing in row " +
              std::to_string(i));
      }
    }
  }

  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::uint64_t> row_start_;
  std::vector<index_t> col_index_;
  std::vector<double> value_;
};

/// One matrix held twice: by rows and by columns (the transpose, also CSR).
/// Immutable after construction.
class DualSparseMatrix {
 public:
  DualSparseMatrix() = default;

  explicit DualSparseMatrix(CsrMatrix by_rows)
      : by_rows_(std::move(by_rows)), by_cols_(by_rows_.transposed()) {}

  std::size_t n_rows() const { return by_rows_.n_rows(); }
  std::size_t n_cols() const { return by_rows_.n_cols(); }
  std::size_t nnz() const { return by_rows_.nnz(); }
  bool square() const { return n_rows() == n_cols(); }

  SparseRow row(std::size_t i) const { return by_rows_.row(i); }
  /// Column j: `cols` holds row indices.
  SparseRow col(std::size_t j) const { return by_cols_.row(j); }
  double at(std::size_t i, std::size_t j) const { return by_rows_.at(i, j); }

  const CsrMatrix& by_rows() const { return by_rows_; }
  const CsrMatrix& by_cols() const { return by_cols_; }

  friend bool operator==(const DualSparseMatrix& a, const DualSparseMatrix& b) {
    return a.by_rows_ == b.by_rows_;
  }

 private:
  CsrMatrix by_rows_;
  CsrMatrix by_cols_;
};

inline DualSparseMatrix build_dual(std::vector<Triplet> triplets,
                                   std::size_t n_rows, std::size_t n_cols) {
  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols)
      throw std::out_of_range("build_dual: triplet (" + std::to_string(t.row) +
                              ", " + std::to_string(t.col) +
                              ") outside matrix bounds");
    if (!std::isfinite(t.value))
      throw std::invalid_argument("build_dual: nonfinite value");
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  for (std::size_t k = 1; k < triplets.size(); ++k) {
    if (triplets[k].row == triplets[k - 1].row &&
        triplets[k].col == triplets[k - 1].col)
      throw std::invalid_argument("build_dual: duplicate entry (" +
                                  std::to_string(triplets[k].row) + ", " +
                                  std::to_string(triplets[k].col) + ")");
  }
  std::vector<std::uint64_t> start(n_rows + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (t.value == 0.0) continue;
    ++start[t.row + 1];
    cols.push_back(static_cast<index_t>(t.col));
    vals.push_back(t.value);
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  return DualSparseMatrix(
      CsrMatrix(n_rows, n_cols, std::move(start), std::move(cols), std::move(vals)));
}

inline std::vector<Triplet> to_triplets(const CsrMatrix& m) {
  std::vector<Triplet> out;
  out.reserve(m.nnz());
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) out.push_back({i, r.cols[k], r.vals[k]});
  }
  return out;
}

inline constexpr double kStochasticTol = 1e-12;

inline void require_row_stochastic(const DualSparseMatrix& p) {
  if (!p.square()) throw std::invalid_argument("transition matrix must be square");
  for (std::size_t i = 0; i < p.n_rows(); ++i) {
    const auto r = p.row(i);
    double sum = 0.0;
    for (const double v : r.vals) {
      if (v < 0.0)
        throw std::invalid_argument("transition matrix has a negative entry in row " +
                                    std::to_string(i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol)
      throw std::invalid_argument("transition matrix row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
  }
}

inline bool is_row_stochastic(const DualSparseMatrix& p) {
  try {
    require_row_stochastic(p);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

/// A = P^T - I for a row-stochastic P. Row i of A is column i of P with the
/// diagonal shifted by -1; entries cancelling to exactly zero are dropped.
inline DualSparseMatrix pagerank_operator(const DualSparseMatrix& p) {
  require_row_stochastic(p);
  const std::size_t n = p.n_rows();
  std::vector<std::uint64_t> start(n + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  cols.reserve(p.nnz() + n);
  vals.reserve(p.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = p.col(i);
    bool diag_done = false;
    auto emit = [&](index_t j, double v) {
      if (v == 0.0) return;
      cols.push_back(j);
      vals.push_back(v);
    };
    for (std::size_t k = 0; k < c.size(); ++k) {
      const index_t j = c.cols[k];
      if (!diag_done && j >= i) {
        if (j == i) {
          emit(j, c.vals[k] - 1.0);
          diag_done = true;
          continue;
        }
        emit(static_cast<index_t>(i), -1.0);
        diag_done = true;
      }
      emit(j, c.vals[k]);
    }
    if (!diag_done) emit(static_cast<index_t>(i), -1.0);
    start[i + 1] = cols.size();
  }
  return DualSparseMatrix(CsrMatrix(n, n, std::move(start), std::move(cols), std::move(vals)));
}

inline DenseVector spmv(const DualSparseMatrix& m, std::span<const double> x) {
  if (x.size() != m.n_cols())
    throw std::invalid_argument("spmv: vector length " + std::to_string(x.size()) +
                                " does not match " + std::to_string(m.n_cols()) +
                                " columns");
  DenseVector y(m.n_rows(), 0.0);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += r.vals[k] * x[r.cols[k]];
    y[i] = acc;
  }
  return y;
}

/// y = M^T x using the column copy.
inline DenseVector spmv_transposed(const DualSparseMatrix& m, std::span<const double> x) {
  if (x.size() != m.n_rows())
    throw std::invalid_argument("spmv_transposed: dimension mismatch");
  DenseVector y(m.n_cols(), 0.0);
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    const auto c = m.col(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) acc += c.vals[k] * x[c.cols[k]];
    y[j] = acc;
  }
  return y;
}

/// 1/2 ||Ax||_2^2 from a fresh product.
inline double residual_two(const DualSparseMatrix& a, std::span<const double> x) {
  const auto b = spmv(a, x);
  double s = 0.0;
  for (const double v : b) s += v * v;
  return 0.5 * s;
}

/// ||Ax||_inf from a fresh product.
inline double residual_inf(const DualSparseMatrix& a, std::span<const double> x) {
  const auto b = spmv(a, x);
  double m = 0.0;
  for (const double v : b) m = std::max(m, std::abs(v));
  return m;
}

struct SparsityStats {
  std::size_t row_nnz_min = 0;
  std::size_t row_nnz_max = 0;
  double row_nnz_avg = 0.0;
  std::size_t col_nnz_min = 0;
  std::size_t col_nnz_max = 0;
  double col_nnz_avg = 0.0;
};

inline SparsityStats sparsity_stats(const DualSparseMatrix& m) {
  auto axis = [](const CsrMatrix& c, std::size_t& mn, std::size_t& mx, double& avg) {
    if (c.n_rows() == 0) return;
    mn = std::numeric_limits<std::size_t>::max();
    mx = 0;
    for (std::size_t i = 0; i < c.n_rows(); ++i) {
      mn = std::min(mn, c.row_nnz(i));
      mx = std::max(mx, c.row_nnz(i));
    }
    avg = static_cast<double>(c.nnz()) / static_cast<double>(c.n_rows());
  };
  SparsityStats s;
  axis(m.by_rows(), s.row_nnz_min, s.row_nnz_max, s.row_nnz_avg);
  axis(m.by_cols(), s.col_nnz_min, s.col_nnz_max, s.col_nnz_avg);
  return s;
}

/// Neumaier-compensated running sum. Tracked objective values receive
/// millions of increments far below their own ulp; plain accumulation drifts.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double v) : sum_(v) {}

  CompensatedSum& operator+=(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator*=(double factor) {
    sum_ *= factor;
    comp_ *= factor;
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Largest squared column 2-norm, the smoothness constant of 1/2||Ax||^2 in
/// the 1-norm.
inline double max_column_norm_sq(const DualSparseMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.n_cols(); ++j) {
    double s = 0.0;
    for (const double v : a.col(j).vals) s += v * v;
    best = std::max(best, s);
  }
  return best;
}

}  // namespace prsparse
