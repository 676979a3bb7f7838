#pragma once

// Gradient method in the 1-norm on the hyperplane sum(x) = 1, for
//
//   f(x) = 1/2 ||Ax||^2 + gamma/2 * sum_i min(x_i, 0)^2.
//
// Each step moves mass delta = (max_i g_i - min_i g_i) / step_denominator from
// the coordinate with the largest partial derivative to the one with the
// smallest. b = Ax, A^T b and the residual part of f are maintained
// incrementally, so a step touches O(s^2) gradient entries and the same number
// of tournament-tree leaves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "prsparse/arg_extreme_tree.hpp"
#include "prsparse/report.hpp"
#include "prsparse/sparse.hpp"

namespace prsparse {

struct Nl1Config {
  double epsilon = 1e-4;
  double gamma = 1.0;
  double step_denominator = 8.0;
  std::uint64_t max_iters = std::numeric_limits<std::uint64_t>::max();
  std::size_t start_vertex = 0;
  std::uint64_t check_stride = 0;  // 0 disables periodic honest rechecks
  bool trace = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("nl1: epsilon must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("nl1: gamma must be nonnegative");
    if (!(step_denominator > 0.0))
      throw std::invalid_argument("nl1: step_denominator must be positive");
  }
};

/// Differences between the incrementally tracked quantities and a fresh
/// recomputation from x.
struct Consistency {
  double b_err = 0.0;      // ||b_tracked - Ax||_inf
  double g_err = 0.0;      // ||g_tracked - A^T A x||_inf
  double f_rel_err = 0.0;  // |f_tracked - f_fresh| / f_fresh (absolute when f_fresh == 0)
  double f_fresh = 0.0;
};

inline constexpr double kHonestTolerance = 1e-8;

class Nl1Solver {
 public:
  Nl1Solver(const DualSparseMatrix& a, Nl1Config cfg) : a_(&a), cfg_(cfg) {
    cfg_.validate();
    if (!a.square()) throw std::invalid_argument("nl1: operator must be square");
    const std::size_t n = a.n_cols();
    if (cfg_.start_vertex >= n) throw std::invalid_argument("nl1: start vertex out of range");
    x_.assign(n, 0.0);
    b_.assign(n, 0.0);
    g_.assign(n, 0.0);
    mark_.assign(n, 0);
    x_[cfg_.start_vertex] = 1.0;
    const auto col = a.col(cfg_.start_vertex);
    for (std::size_t k = 0; k < col.size(); ++k) b_[col.cols[k]] = col.vals[k];
    for (std::size_t k = 0; k < col.size(); ++k) {
      const std::size_t i = col.cols[k];
      f_ += 0.5 * b_[i] * b_[i];
      const auto row = a.row(i);
      for (std::size_t t = 0; t < row.size(); ++t) g_[row.cols[t]] += row.vals[t] * b_[i];
    }
    std::vector<double> total(n);
    for (std::size_t j = 0; j < n; ++j) total[j] = gradient(j);
    min_tree_ = ArgMinTree(total);
    max_tree_ = ArgMaxTree(total);
    f_sync_ = f_.value();
  }

  /// Residual part of f, 1/2 ||Ax||^2, as tracked.
  double tracked_f() const { return f_.value(); }
  bool converged() const { return f_.value() <= 0.5 * cfg_.epsilon * cfg_.epsilon; }
  std::uint64_t iteration() const { return iter_; }

  /// Total partial derivative: (A^T A x)_j + gamma * min(x_j, 0).
  double gradient(std::size_t j) const { return g_[j] + cfg_.gamma * std::min(x_[j], 0.0); }

  const DenseVector& x() const { return x_; }
  const DenseVector& b() const { return b_; }
  const DenseVector& residual_gradient() const { return g_; }
  const ArgMinTree& min_tree() const { return min_tree_; }
  const ArgMaxTree& max_tree() const { return max_tree_; }
  const Nl1Config& config() const { return cfg_; }

  TreeUpdateMetrics tree_metrics() const {
    auto m = min_tree_.metrics();
    m += max_tree_.metrics();
    return m;
  }

  /// One step. Returns false when the gradient is constant (delta == 0), in
  /// which case nothing changes.
  bool step() {
    const auto lo = min_tree_.top();
    const auto hi = max_tree_.top();
    const double delta = (hi.value - lo.value) / cfg_.step_denominator;
    if (!std::isfinite(delta)) throw std::runtime_error("nl1: nonfinite step");
    if (delta == 0.0) return false;
    move(lo.index, delta);
    move(hi.index, -delta);
    flush();
    ++iter_;
    if (f_.value() < f_sync_ / 16.0) resync_f();
    return true;
  }

  Consistency check() const {
    Consistency c;
    const auto fresh_b = spmv(*a_, x_);
    const auto fresh_g = spmv_transposed(*a_, fresh_b);
    for (std::size_t i = 0; i < fresh_b.size(); ++i) {
      c.b_err = std::max(c.b_err, std::abs(fresh_b[i] - b_[i]));
      c.f_fresh += 0.5 * fresh_b[i] * fresh_b[i];
    }
    for (std::size_t j = 0; j < fresh_g.size(); ++j)
      c.g_err = std::max(c.g_err, std::abs(fresh_g[j] - g_[j]));
    const double diff = std::abs(f_.value() - c.f_fresh);
    c.f_rel_err = c.f_fresh > 0.0 ? diff / c.f_fresh : diff;
    return c;
  }

 private:
  void touch(std::size_t j) {
    if (!mark_[j]) {
      mark_[j] = 1;
      touched_.push_back(static_cast<index_t>(j));
    }
  }

  void move(std::size_t j, double dx) {
    x_[j] += dx;
    touch(j);
    const auto col = a_->col(j);
    for (std::size_t k = 0; k < col.size(); ++k) {
      const std::size_t i = col.cols[k];
      const double db = col.vals[k] * dx;
      b_[i] += db;
      // 1/2 (b + db)^2 - 1/2 b^2 written with the updated b.
      f_ += b_[i] * db - 0.5 * db * db;
      const auto row = a_->row(i);
      for (std::size_t t = 0; t < row.size(); ++t) {
        g_[row.cols[t]] += row.vals[t] * db;
        touch(row.cols[t]);
      }
    }
  }

  // Increments carry rounding proportional to the f they were taken at, so
  // after f has fallen far the running sum is rebuilt from b. This keeps the
  // error relative to the current f at a cost of O(n) per 16-fold decrease.
  void resync_f() {
    CompensatedSum sum(0.0);
    for (const double v : b_) sum += 0.5 * v * v;
    f_ = sum;
    f_sync_ = f_.value();
  }

  void flush() {
    for (const index_t j : touched_) {
      const double v = gradient(j);
      min_tree_.update(j, v);
      max_tree_.update(j, v);
      mark_[j] = 0;
    }
    touched_.clear();
  }

  const DualSparseMatrix* a_;
  Nl1Config cfg_;
  DenseVector x_, b_, g_;
  CompensatedSum f_;
  double f_sync_ = 0.0;  // f at the last rebuild
  std::uint64_t iter_ = 0;
  ArgMinTree min_tree_;
  ArgMaxTree max_tree_;
  std::vector<char> mark_;
  std::vector<index_t> touched_;
};

namespace detail {

inline void require_consistent(const Consistency& c, const char* who) {
  if (c.f_rel_err > kHonestTolerance || c.g_err > kHonestTolerance)
    throw std::runtime_error(std::string(who) +
                             ": tracked state diverged from honest recomputation (f rel err " +
                             std::to_string(c.f_rel_err) + ", gradient err " +
                             std::to_string(c.g_err) + ")");
}

}  // namespace detail

inline SolveResult nl1_solve(const DualSparseMatrix& a, const Nl1Config& cfg) {
  Nl1Solver solver(a, cfg);
  SolveResult out;
  auto& rep = out.report;
  rep.method = Method::kNl1;
  rep.problem.n = a.n_cols();

  detail::LoopClock clock;
  detail::TraceSchedule schedule;
  clock.start();
  rep.stop_reason = "max_iters";
  for (;;) {
    const auto k = solver.iteration();
    if (cfg.trace && schedule.due(k)) {
      rep.trace.push_back({k, clock.elapsed_ns(), solver.tracked_f()});
      schedule.advance(k);
    }
    if (solver.converged()) {
      rep.stop_reason = "converged";
      break;
    }
    if (k >= cfg.max_iters) break;
    if (!solver.step()) {
      rep.stop_reason = "stalled";
      break;
    }
    if (cfg.check_stride != 0 && solver.iteration() % cfg.check_stride == 0) {
      clock.pause();
      detail::require_consistent(solver.check(), "nl1");
      clock.resume();
    }
  }
  clock.pause();
  rep.wall_time_ns = clock.elapsed_ns();
  rep.iterations = solver.iteration();
  if (cfg.trace && (rep.trace.empty() || rep.trace.back().iter != rep.iterations))
    rep.trace.push_back({rep.iterations, rep.wall_time_ns, solver.tracked_f()});

  out.x = solver.x();
  rep.tracked_f = solver.tracked_f();
  rep.final_residual_two = residual_two(a, out.x);
  rep.final_residual_inf = residual_inf(a, out.x);
  rep.min_x = *std::min_element(out.x.begin(), out.x.end());
  rep.tree_metrics = solver.tree_metrics();
  rep.success = rep.stop_reason == "converged";
  if (rep.success) detail::require_consistent(solver.check(), "nl1");
  return out;
}

}  // namespace prsparse
