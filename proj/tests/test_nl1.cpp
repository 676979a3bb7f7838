#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "prsparse/nl1.hpp"
#include "prsparse/problems.hpp"

using namespace prsparse;

namespace {

DualSparseMatrix swap_A() {
  return pagerank_operator(build_dual({{0, 1, 1.0}, {1, 0, 1.0}}, 2, 2));
}

DualSparseMatrix cycle_A() {
  return pagerank_operator(build_dual({{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, 3, 3));
}

double sum(const DenseVector& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

// Fresh total gradient, independent of the solver's bookkeeping.
DenseVector fresh_gradient(const DualSparseMatrix& a, const DenseVector& x, double gamma) {
  const auto ax = spmv(a, x);
  auto g = spmv_transposed(a, ax);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] += gamma * std::min(x[j], 0.0);
  return g;
}

}  // namespace

TEST(Nl1Config, Validation) {
  Nl1Config c;
  EXPECT_NO_THROW(c.validate());
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.gamma = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.step_denominator = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.start_vertex = 5;
  const auto a = swap_A();
  EXPECT_THROW(Nl1Solver(a, c), std::invalid_argument);
  const auto rect = build_dual({}, 2, 3);
  EXPECT_THROW(Nl1Solver(rect, Nl1Config{}), std::invalid_argument);
}

TEST(Nl1Init, Examples) {
  const auto zero = build_dual({}, 4, 4);
  const Nl1Solver z(zero, Nl1Config{});
  EXPECT_EQ(z.tracked_f(), 0.0);
  EXPECT_TRUE(z.converged());

  const auto a = swap_A();
  const Nl1Solver s(a, Nl1Config{});
  EXPECT_EQ(s.b(), (DenseVector{-1.0, 1.0}));
  EXPECT_EQ(s.tracked_f(), 1.0);
  EXPECT_EQ(sum(s.x()), 1.0);
  EXPECT_EQ(s.x()[0], 1.0);
}

TEST(Nl1Step, DeltaArithmetic) {
  // Columns chosen so that A^T A e_0 = (0.5, -0.3, 0.1).
  const auto a = build_dual({{0, 0, 0.5}, {1, 0, 0.5}, {0, 1, -0.6}, {0, 2, 0.2}}, 3, 3);
  Nl1Solver s(a, Nl1Config{});
  EXPECT_NEAR(s.gradient(0), 0.5, 1e-15);
  EXPECT_NEAR(s.gradient(1), -0.3, 1e-15);
  EXPECT_NEAR(s.gradient(2), 0.1, 1e-15);
  ASSERT_TRUE(s.step());
  EXPECT_NEAR(s.x()[1], 0.1, 1e-15);
  EXPECT_NEAR(s.x()[0], 0.9, 1e-15);
  EXPECT_EQ(s.x()[2], 0.0);
  EXPECT_NEAR(sum(s.x()), 1.0, 1e-15);
}

TEST(Nl1Step, ConstantGradientIsStationary) {
  const auto zero = build_dual({}, 3, 3);
  Nl1Solver s(zero, Nl1Config{});
  const auto before = s.x();
  EXPECT_FALSE(s.step());
  EXPECT_EQ(s.x(), before);
  EXPECT_EQ(s.iteration(), 0u);
}

TEST(Nl1Step, HyperplaneConservation) {
  const auto a = pagerank_operator(gen_random_ds(1000, 3, 4));
  Nl1Config c;
  c.epsilon = 1e-12;
  Nl1Solver s(a, c);
  for (int k = 1; k <= 1000000; ++k) {
    ASSERT_TRUE(s.step());
    if (k % 100000 == 0) {
      ASSERT_NEAR(sum(s.x()), 1.0, 1e-9) << "after " << k << " steps";
    }
  }
}

TEST(Nl1Step, IncrementalMatchesFresh) {
  for (const std::uint64_t seed : {1, 2}) {
    const auto a = pagerank_operator(gen_random_ds(2000, 11, seed));
    Nl1Config c;
    c.epsilon = 1e-12;
    c.gamma = 1.0;
    Nl1Solver s(a, c);
    for (int k = 1; k <= 20000; ++k) {
      ASSERT_TRUE(s.step());
      if (k % 5000 == 0) {
        const auto chk = s.check();
        EXPECT_LE(chk.b_err, 1e-8);
        EXPECT_LE(chk.g_err, 1e-8);
        EXPECT_LE(chk.f_rel_err, 1e-8);
        EXPECT_NEAR(chk.f_fresh, residual_two(a, s.x()), 1e-15);
        const auto g = fresh_gradient(a, s.x(), c.gamma);
        for (std::size_t j = 0; j < g.size(); ++j) {
          ASSERT_NEAR(s.min_tree().value(j), g[j], 1e-8);
          ASSERT_EQ(s.min_tree().value(j), s.max_tree().value(j));
        }
      }
    }
  }
}

TEST(Nl1Step, PenaltyEntersGradient) {
  const auto a = pagerank_operator(gen_diagonal(50, 3));
  Nl1Config c;
  c.epsilon = 1e-12;
  c.gamma = 5.0;
  Nl1Solver s(a, c);
  for (int k = 0; k < 5000; ++k) s.step();
  for (std::size_t j = 0; j < 50; ++j) {
    const double expected = s.residual_gradient()[j] + 5.0 * std::min(s.x()[j], 0.0);
    EXPECT_EQ(s.gradient(j), expected);
    EXPECT_EQ(s.min_tree().value(j), expected);
  }
}

TEST(Nl1Solve, ZeroOperator) {
  const auto zero = build_dual({}, 5, 5);
  const auto r = nl1_solve(zero, Nl1Config{});
  EXPECT_EQ(r.report.iterations, 0u);
  EXPECT_TRUE(r.report.success);
  EXPECT_EQ(r.report.stop_reason, "converged");
}

TEST(Nl1Solve, ThreeCycleConvergesToUniform) {
  const auto a = cycle_A();
  Nl1Config c;
  c.epsilon = 1e-4;
  c.check_stride = 64;
  const auto r = nl1_solve(a, c);
  ASSERT_TRUE(r.report.success);
  EXPECT_LE(residual_two(a, r.x), 0.5e-8 * (1 + 1e-8));
  EXPECT_EQ(r.report.final_residual_two, residual_two(a, r.x));
  // The chain is a single cycle, so the stationary vector is uniform.
  for (const double v : r.x) EXPECT_NEAR(v, 1.0 / 3.0, 1e-2);
  EXPECT_NEAR(sum(r.x), 1.0, 1e-12);
}

TEST(Nl1Solve, ReportsIterationCap) {
  const auto a = pagerank_operator(gen_diagonal(1000, 3));
  Nl1Config c;
  c.max_iters = 1000;
  const auto r = nl1_solve(a, c);
  EXPECT_FALSE(r.report.success);
  EXPECT_EQ(r.report.stop_reason, "max_iters");
  EXPECT_EQ(r.report.iterations, 1000u);
  EXPECT_NEAR(r.report.tracked_f, r.report.final_residual_two,
              1e-8 * r.report.final_residual_two);
}

TEST(Nl1Solve, TraceIsStrictlyIncreasing) {
  const auto a = pagerank_operator(gen_random_ds(300, 3, 1));
  Nl1Config c;
  c.epsilon = 1e-3;
  const auto r = nl1_solve(a, c);
  ASSERT_TRUE(r.report.success);
  ASSERT_GE(r.report.trace.size(), 2u);
  EXPECT_EQ(r.report.trace.front().iter, 0u);
  EXPECT_EQ(r.report.trace.back().iter, r.report.iterations);
  for (std::size_t k = 1; k < r.report.trace.size(); ++k) {
    EXPECT_LT(r.report.trace[k - 1].iter, r.report.trace[k].iter);
    EXPECT_LE(r.report.trace[k - 1].elapsed_ns, r.report.trace[k].elapsed_ns);
  }
  EXPECT_GT(r.report.tree_metrics.updates, 0u);
  EXPECT_LE(r.report.tree_metrics.average_climb(), r.report.tree_metrics.full_height);
}

TEST(Nl1Solve, ProgressOnDiagonalFamily) {
  const auto a = pagerank_operator(gen_diagonal(1000, 3));
  Nl1Config c;
  c.epsilon = 1e-12;
  Nl1Solver s(a, c);
  double prev = s.tracked_f();
  for (int block = 0; block < 20; ++block) {
    for (int k = 0; k < 10000; ++k) s.step();
    EXPECT_LT(s.tracked_f(), prev) << "block " << block;
    prev = s.tracked_f();
  }
}
