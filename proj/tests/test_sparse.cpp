#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "prsparse/dsm_io.hpp"
#include "prsparse/sparse.hpp"

using namespace prsparse;

namespace {

DualSparseMatrix three_cycle_P() {
  return build_dual({{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, 3, 3);
}

DualSparseMatrix swap_P() { return build_dual({{0, 1, 1.0}, {1, 0, 1.0}}, 2, 2); }

DualSparseMatrix identity(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return build_dual(t, n, n);
}

std::vector<Triplet> random_triplets(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                     double density) {
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (keep(rng)) t.push_back({i, j, val(rng)});
  std::shuffle(t.begin(), t.end(), rng);
  return t;
}

// Random row-stochastic P with a few entries per row.
DualSparseMatrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> cols;
    const std::size_t k = 1 + pick(rng) % 4;
    while (cols.size() < std::min(k, n)) cols.insert(pick(rng));
    std::vector<double> ws;
    double total = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) total += ws.emplace_back(w(rng));
    std::size_t c = 0;
    for (const auto j : cols) t.push_back({i, j, ws[c++] / total});
  }
  return build_dual(t, n, n);
}

using Key = std::tuple<std::size_t, std::size_t, double>;

std::vector<Key> sorted_keys(const std::vector<Triplet>& t, bool swap) {
  std::vector<Key> k;
  for (const auto& e : t) k.emplace_back(swap ? e.col : e.row, swap ? e.row : e.col, e.value);
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

TEST(BuildDual, SingletonIsSymmetric) {
  const auto m = build_dual({{0, 0, 1.0}}, 1, 1);
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.by_rows(), m.by_cols());
  EXPECT_EQ(m.at(0, 0), 1.0);
}

TEST(BuildDual, EmptyTripletListGivesZeroMatrix) {
  const auto m = build_dual({}, 3, 3);
  EXPECT_EQ(m.nnz(), 0u);
  EXPECT_EQ(m.by_cols().nnz(), 0u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(m.row(i).empty());
    EXPECT_TRUE(m.col(i).empty());
  }
}

TEST(BuildDual, ThreeCyclePermutation) {
  const auto m = three_cycle_P();
  ASSERT_EQ(m.row(0).size(), 1u);
  EXPECT_EQ(m.row(0).cols[0], 1u);
  EXPECT_EQ(m.row(0).vals[0], 1.0);
  ASSERT_EQ(m.col(1).size(), 1u);
  EXPECT_EQ(m.col(1).cols[0], 0u);
  EXPECT_EQ(m.col(1).vals[0], 1.0);
}

TEST(BuildDual, RejectsOutOfRangeAndDuplicates) {
  EXPECT_THROW(build_dual({{3, 0, 1.0}}, 3, 3), std::out_of_range);
  EXPECT_THROW(build_dual({{0, 3, 1.0}}, 3, 3), std::out_of_range);
  EXPECT_THROW(build_dual({{1, 1, 1.0}, {1, 1, 2.0}}, 3, 3), std::invalid_argument);
}

TEST(BuildDual, DropsExactZeros) {
  const auto m = build_dual({{0, 0, 0.0}, {0, 1, 2.0}, {1, 0, -0.0}}, 2, 2);
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.at(0, 1), 2.0);
  EXPECT_EQ(m.at(0, 0), 0.0);
}

TEST(BuildDual, TransposeDualityProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng() % 40;
    const std::size_t cols = 1 + rng() % 40;
    const auto t = random_triplets(rng, rows, cols, 0.15);
    const auto m = build_dual(t, rows, cols);
    EXPECT_EQ(m.by_cols().n_rows(), cols);
    EXPECT_EQ(sorted_keys(to_triplets(m.by_rows()), false),
              sorted_keys(to_triplets(m.by_cols()), true));
    EXPECT_EQ(sorted_keys(to_triplets(m.by_rows()), false), sorted_keys(t, false));
    EXPECT_EQ(m.by_cols().transposed(), m.by_rows());
  }
}

TEST(CsrMatrix, ValidatesStructure) {
  EXPECT_THROW(CsrMatrix(2, 2, {0, 1}, {0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(CsrMatrix(1, 2, {0, 1}, {2}, {1.0}), std::invalid_argument);
  EXPECT_NO_THROW(CsrMatrix(1, 2, {0, 2}, {0, 1}, {1.0, 1.0}));
}

TEST(PagerankOperator, IdentityGivesZero) {
  const auto a = pagerank_operator(identity(3));
  EXPECT_EQ(a.nnz(), 0u);
}

TEST(PagerankOperator, ThreeCycle) {
  const auto a = pagerank_operator(three_cycle_P());
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(a.at(j, j), -1.0);
    const auto c = a.col(j);
    ASSERT_EQ(c.size(), 2u);
    int plus = 0;
    double sum = 0.0;
    for (const double v : c.vals) {
      plus += v == 1.0;
      sum += v;
    }
    EXPECT_EQ(plus, 1);
    EXPECT_EQ(sum, 0.0);
  }
  // A = P^T - I: P(0,1) = 1 becomes A(1,0) = 1.
  EXPECT_EQ(a.at(1, 0), 1.0);
}

TEST(PagerankOperator, SwapMatrix) {
  const auto a = pagerank_operator(swap_P());
  EXPECT_EQ(a.at(0, 0), -1.0);
  EXPECT_EQ(a.at(0, 1), 1.0);
  EXPECT_EQ(a.at(1, 0), 1.0);
  EXPECT_EQ(a.at(1, 1), -1.0);
  const DenseVector half{0.5, 0.5};
  EXPECT_EQ(residual_inf(a, half), 0.0);
  const DenseVector off{0.6, 0.4};
  EXPECT_GT(residual_inf(a, off), 0.0);
}

TEST(PagerankOperator, RejectsNonStochastic) {
  EXPECT_THROW(pagerank_operator(build_dual({{0, 0, 0.5}}, 1, 1)), std::invalid_argument);
  EXPECT_THROW(pagerank_operator(build_dual({{0, 0, 1.5}, {0, 1, -0.5}, {1, 1, 1.0}}, 2, 2)),
               std::invalid_argument);
  EXPECT_THROW(pagerank_operator(build_dual({{0, 0, 1.0}}, 1, 2)), std::invalid_argument);
}

TEST(PagerankOperator, ColumnSumsVanishAndEntriesBounded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    const auto p = random_stochastic(rng, n);
    const auto a = pagerank_operator(p);
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (const double v : a.col(j).vals) {
        sum += v;
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_NEAR(sum, 0.0, 1e-12);
    }
    // Dense oracle for A = P^T - I.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_EQ(a.at(i, j), p.at(j, i) - (i == j ? 1.0 : 0.0));
  }
}

TEST(Spmv, Examples) {
  const auto zero = build_dual({}, 3, 3);
  const DenseVector x{1.0, -2.0, 3.0};
  EXPECT_EQ(spmv(zero, x), (DenseVector{0.0, 0.0, 0.0}));
  EXPECT_EQ(spmv(identity(3), x), x);
  const auto a = pagerank_operator(three_cycle_P());
  const DenseVector u(3, 1.0 / 3.0);
  for (const double v : spmv(a, u)) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_THROW(spmv(a, DenseVector(2, 0.0)), std::invalid_argument);
  EXPECT_THROW(spmv_transposed(a, DenseVector(4, 0.0)), std::invalid_argument);
}

TEST(Spmv, MatchesDenseOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng() % 30;
    const std::size_t cols = 1 + rng() % 30;
    const auto t = random_triplets(rng, rows, cols, 0.2);
    const auto m = build_dual(t, rows, cols);
    DenseVector x(cols), y(rows);
    for (auto& v : x) v = val(rng);
    for (auto& v : y) v = val(rng);
    std::vector<long double> ax(rows, 0.0L), aty(cols, 0.0L);
    for (const auto& e : t) {
      ax[e.row] += static_cast<long double>(e.value) * x[e.col];
      aty[e.col] += static_cast<long double>(e.value) * y[e.row];
    }
    const auto got = spmv(m, x);
    const auto got_t = spmv_transposed(m, y);
    for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(got[i], static_cast<double>(ax[i]), 1e-12);
    for (std::size_t j = 0; j < cols; ++j)
      EXPECT_NEAR(got_t[j], static_cast<double>(aty[j]), 1e-12);
  }
}

TEST(Residuals, Examples) {
  const auto zero = build_dual({}, 2, 2);
  EXPECT_EQ(residual_two(zero, DenseVector{0.3, 0.7}), 0.0);
  EXPECT_EQ(residual_inf(zero, DenseVector{0.3, 0.7}), 0.0);

  const auto a = pagerank_operator(swap_P());
  const DenseVector e0{1.0, 0.0};
  EXPECT_EQ(spmv(a, e0), (DenseVector{-1.0, 1.0}));
  EXPECT_EQ(residual_two(a, e0), 1.0);
  EXPECT_EQ(residual_inf(a, e0), 1.0);

  const auto c = pagerank_operator(three_cycle_P());
  const DenseVector u(3, 1.0 / 3.0);
  EXPECT_NEAR(residual_two(c, u), 0.0, 1e-30);
  EXPECT_NEAR(residual_inf(c, u), 0.0, 1e-15);
}

TEST(SparsityStats, Examples) {
  const auto s = sparsity_stats(identity(4));
  EXPECT_EQ(s.row_nnz_min, 1u);
  EXPECT_EQ(s.row_nnz_max, 1u);
  EXPECT_EQ(s.row_nnz_avg, 1.0);
  EXPECT_EQ(s.col_nnz_min, 1u);
  EXPECT_EQ(s.col_nnz_max, 1u);
  EXPECT_EQ(s.col_nnz_avg, 1.0);

  const auto z = sparsity_stats(build_dual({}, 5, 5));
  EXPECT_EQ(z.row_nnz_min, 0u);
  EXPECT_EQ(z.row_nnz_max, 0u);
  EXPECT_EQ(z.row_nnz_avg, 0.0);
  EXPECT_EQ(z.col_nnz_max, 0u);
}

TEST(SparsityStats, OrderedAndCountsMatch) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng() % 30, cols = 1 + rng() % 30;
    const auto t = random_triplets(rng, rows, cols, 0.3);
    const auto m = build_dual(t, rows, cols);
    const auto s = sparsity_stats(m);
    EXPECT_LE(static_cast<double>(s.row_nnz_min), s.row_nnz_avg);
    EXPECT_LE(s.row_nnz_avg, static_cast<double>(s.row_nnz_max));
    EXPECT_LE(static_cast<double>(s.col_nnz_min), s.col_nnz_avg);
    EXPECT_LE(s.col_nnz_avg, static_cast<double>(s.col_nnz_max));
    std::vector<std::size_t> per_row(rows), per_col(cols);
    for (const auto& e : t) {
      ++per_row[e.row];
      ++per_col[e.col];
    }
    EXPECT_EQ(s.row_nnz_max, *std::max_element(per_row.begin(), per_row.end()));
    EXPECT_EQ(s.col_nnz_min, *std::min_element(per_col.begin(), per_col.end()));
  }
}

TEST(CompensatedSum, KeepsIncrementsBelowUlp) {
  CompensatedSum s(1.0);
  double naive = 1.0;
  for (int k = 0; k < 1000000; ++k) {
    s += 1e-16;
    naive += 1e-16;
  }
  EXPECT_EQ(naive, 1.0);
  EXPECT_NEAR(s.value(), 1.0 + 1e-10, 1e-15);
  s *= 0.5;
  EXPECT_NEAR(s.value(), 0.5 + 0.5e-10, 1e-15);
}

TEST(Dsm, HeaderLayoutIsLittleEndian) {
  const auto m = build_dual({{0, 1, 1.0}, {1, 0, 0.5}}, 2, 3);
  std::stringstream ss;
  write_dsm(ss, m);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 3 * 8 + 3 * 8 + 2 * 8 + 2 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "DSM1");
  auto u64_at = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[off + b]);
    return v;
  };
  EXPECT_EQ(u64_at(4), 2u);
  EXPECT_EQ(u64_at(12), 3u);
  EXPECT_EQ(u64_at(20), 2u);
  EXPECT_EQ(u64_at(28), 0u);   // row_start
  EXPECT_EQ(u64_at(36), 1u);
  EXPECT_EQ(u64_at(44), 2u);
  EXPECT_EQ(u64_at(52), 1u);   // col_index
  EXPECT_EQ(u64_at(60), 0u);
  EXPECT_EQ(u64_at(68), 0x3FF0000000000000u);  // 1.0
  EXPECT_EQ(u64_at(76), 0x3FE0000000000000u);  // 0.5
}

TEST(Dsm, ByteExactRoundTrip) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = 1 + rng() % 50, cols = 1 + rng() % 50;
    const auto m = build_dual(random_triplets(rng, rows, cols, 0.1), rows, cols);
    std::stringstream first;
    write_dsm(first, m);
    std::stringstream in(first.str());
    const auto back = read_dsm(in);
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.by_cols(), m.by_cols());
    std::stringstream second;
    write_dsm(second, back);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(Dsm, RejectsCorruptInput) {
  std::stringstream bad_magic("DSM2" + std::string(24, '\0'));
  EXPECT_THROW(read_dsm(bad_magic), std::runtime_error);

  const auto m = build_dual({{0, 1, 1.0}}, 2, 2);
  std::stringstream ss;
  write_dsm(ss, m);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() - 3));
  EXPECT_THROW(read_dsm(truncated), std::runtime_error);

  std::string bytes = ss.str();
  bytes[4 + 3 * 8 + 3 * 8] = 7;  // column index 7 in a 2-column matrix
  std::stringstream bad_col(bytes);
  EXPECT_THROW(read_dsm(bad_col), std::runtime_error);
}
