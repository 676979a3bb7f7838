#pragma once

// Frank-Wolfe on the unit simplex for f(x) = 1/2 ||Ax||^2 with the open-loop
// step gamma_k = 2 / (k + 1).
//
// The iterate is stored as x_k = beta * x_hat. The convex-combination shrink
// (1 - gamma) x_k then only rescales beta, and adding gamma * e_i becomes a
// single-coordinate change of x_hat by gamma / beta. b_hat = A x_hat and
// g_hat = A^T b_hat are updated on the touched column/rows; since g = beta *
// g_hat with beta > 0, the argmin over g_hat is the Frank-Wolfe vertex.
//
// beta after step k equals prod_{r=2..k} (1 - 2/(r+1)) = 2 / (k (k + 1)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "prsparse/arg_extreme_tree.hpp"
#include "prsparse/nl1.hpp"
#include "prsparse/report.hpp"
#include "prsparse/sparse.hpp"

namespace prsparse {

struct FwConfig {
  double epsilon = 1e-4;
  std::uint64_t max_iters = std::numeric_limits<std::uint64_t>::max();
  std::size_t start_vertex = 0;
  std::uint64_t check_stride = 0;
  bool trace = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("fw: epsilon must be positive");
  }
};

/// ceil(32 / eps^2): enough iterations for 1/2||Ax||^2 <= eps^2 / 2 given
/// L_1 <= 2 and squared 1-norm diameter 4.
inline std::uint64_t fw_iteration_bound(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fw_iteration_bound: epsilon must be positive");
  return static_cast<std::uint64_t>(std::ceil(32.0 / (epsilon * epsilon)));
}

/// The a-priori guarantee f(x_k) <= 2 L R^2 / (k + 1) with L = 2, R^2 = 4.
inline double fw_guarantee(std::uint64_t k) { return 16.0 / static_cast<double>(k + 1); }

class FwSolver {
 public:
  FwSolver(const DualSparseMatrix& a, FwConfig cfg) : a_(&a), cfg_(cfg) {
    cfg_.validate();
    if (!a.square()) throw std::invalid_argument("fw: operator must be square");
    const std::size_t n = a.n_cols();
    if (cfg_.start_vertex >= n) throw std::invalid_argument("fw: start vertex out of range");
    x_hat_.assign(n, 0.0);
    b_hat_.assign(n, 0.0);
    g_hat_.assign(n, 0.0);
    mark_.assign(n, 0);
    // Gradient starts at zero everywhere; move() fills b_hat, g_hat and f and
    // records touched leaves, flushed once the tree exists.
    min_tree_ = ArgMinTree(g_hat_);
    move(cfg_.start_vertex, 1.0);
    flush();
    min_tree_.reset_metrics();
  }

  std::uint64_t k() const { return k_; }
  double beta() const { return beta_; }
  double tracked_f() const { return f_.value(); }
  bool converged() const { return f_.value() <= 0.5 * cfg_.epsilon * cfg_.epsilon; }

  const DenseVector& x_hat() const { return x_hat_; }
  const DenseVector& b_hat() const { return b_hat_; }
  const DenseVector& g_hat() const { return g_hat_; }
  const ArgMinTree& min_tree() const { return min_tree_; }
  const TreeUpdateMetrics& tree_metrics() const { return min_tree_.metrics(); }
  std::size_t last_vertex() const { return last_vertex_; }

  /// x_{k+1} = (1 - gamma_k) x_k + gamma_k e_{i_k}, gamma_k = 2 / (k + 1).
  void step() {
    const std::size_t i = min_tree_.top().index;
    last_vertex_ = i;
    if (k_ == 1) {
      // gamma_1 = 1: the next iterate is the vertex itself. Move the unit mass
      // instead of multiplying beta by zero.
      if (i != cfg_.start_vertex) {
        move(cfg_.start_vertex, -x_hat_[cfg_.start_vertex]);
        move(i, 1.0);
        x_hat_[cfg_.start_vertex] = 0.0;
      }
    } else {
      const double gamma = 2.0 / static_cast<double>(k_ + 1);
      const double shrink = 1.0 - gamma;
      beta_ *= shrink;
      f_ *= shrink * shrink;
      move(i, gamma / beta_);
    }
    flush();
    ++k_;
  }

  DenseVector extract() const {
    DenseVector x(x_hat_.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = beta_ * x_hat_[j];
    return x;
  }

  /// Tracked b and g are compared after scaling by beta.
  Consistency check() const {
    Consistency c;
    const auto x = extract();
    const auto fresh_b = spmv(*a_, x);
    const auto fresh_g = spmv_transposed(*a_, fresh_b);
    for (std::size_t i = 0; i < fresh_b.size(); ++i) {
      c.b_err = std::max(c.b_err, std::abs(fresh_b[i] - beta_ * b_hat_[i]));
      c.f_fresh += 0.5 * fresh_b[i] * fresh_b[i];
    }
    for (std::size_t j = 0; j < fresh_g.size(); ++j)
      c.g_err = std::max(c.g_err, std::abs(fresh_g[j] - beta_ * g_hat_[j]));
    const double diff = std::abs(f_.value() - c.f_fresh);
    c.f_rel_err = c.f_fresh > 0.0 ? diff / c.f_fresh : diff;
    return c;
  }

 private:
  void move(std::size_t j, double dx) {
    x_hat_[j] += dx;
    const double beta_sq = beta_ * beta_;
    const auto col = a_->col(j);
    for (std::size_t t = 0; t < col.size(); ++t) {
      const std::size_t i = col.cols[t];
      const double db = col.vals[t] * dx;
      b_hat_[i] += db;
      f_ += beta_sq * (b_hat_[i] * db - 0.5 * db * db);
      const auto row = a_->row(i);
      for (std::size_t u = 0; u < row.size(); ++u) {
        const index_t r = row.cols[u];
        g_hat_[r] += row.vals[u] * db;
        if (!mark_[r]) {
          mark_[r] = 1;
          touched_.push_back(r);
        }
      }
    }
  }

  void flush() {
    for (const index_t j : touched_) {
      min_tree_.update(j, g_hat_[j]);
      mark_[j] = 0;
    }
    touched_.clear();
  }

  const DualSparseMatrix* a_;
  FwConfig cfg_;
  DenseVector x_hat_, b_hat_, g_hat_;
  double beta_ = 1.0;
  CompensatedSum f_;
  std::uint64_t k_ = 1;
  std::size_t last_vertex_ = 0;
  ArgMinTree min_tree_;
  std::vector<char> mark_;
  std::vector<index_t> touched_;
};

inline SolveResult fw_solve(const DualSparseMatrix& a, const FwConfig& cfg) {
  FwSolver solver(a, cfg);
  SolveResult out;
  auto& rep = out.report;
  rep.method = Method::kFw;
  rep.problem.n = a.n_cols();

  detail::LoopClock clock;
  detail::TraceSchedule schedule;
  const std::uint64_t bound = fw_iteration_bound(cfg.epsilon);
  clock.start();
  rep.stop_reason = "max_iters";
  std::uint64_t steps = 0;
  for (;;) {
    if (cfg.trace && schedule.due(steps)) {
      rep.trace.push_back({steps, clock.elapsed_ns(), solver.tracked_f()});
      schedule.advance(steps);
    }
    if (solver.converged()) {
      rep.stop_reason = "converged";
      break;
    }
    if (steps >= cfg.max_iters || steps >= bound) break;
    solver.step();
    ++steps;
    if (cfg.check_stride != 0 && steps % cfg.check_stride == 0) {
      clock.pause();
      detail::require_consistent(solver.check(), "fw");
      clock.resume();
    }
  }
  clock.pause();
  rep.wall_time_ns = clock.elapsed_ns();
  rep.iterations = steps;
  if (cfg.trace && (rep.trace.empty() || rep.trace.back().iter != steps))
    rep.trace.push_back({steps, rep.wall_time_ns, solver.tracked_f()});

  out.x = solver.extract();
  rep.tracked_f = solver.tracked_f();
  rep.final_residual_two = residual_two(a, out.x);
  rep.final_residual_inf = residual_inf(a, out.x);
  rep.min_x = *std::min_element(out.x.begin(), out.x.end());
  rep.tree_metrics = solver.tree_metrics();
  rep.success = rep.stop_reason == "converged";
  if (rep.success) detail::require_consistent(solver.check(), "fw");
  return out;
}

}  // namespace prsparse
