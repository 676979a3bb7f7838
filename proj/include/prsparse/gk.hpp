#pragma once

// Randomized exponential-weights self-play for the matrix game
//
//   min_{x in S_n} max_{w in S_2n} <w, A~ x>,   A~ = [A; -A],
//
// whose value is min_x ||Ax||_inf = 0. Player B (the minimizer, columns) and
// player A (the maximizer, 2n rows) each keep unnormalized weights in a
// WeightTree, draw one pure strategy per step, and multiply only the weights
// that the opponent's draw touches: one (signed) row of A for player B, one
// column of A (both signs) for player A. A step costs O(s log n).
//
// Weights are never normalized. When a weight or a root passes the rescale
// threshold the whole tree is multiplied by a power of two near 1/root; this
// is exact in floating point and leaves every later draw unchanged. The
// accumulated log-scale is kept so diagnostics report growth on the original
// scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "prsparse/report.hpp"
#include "prsparse/sparse.hpp"
#include "prsparse/weight_tree.hpp"

namespace prsparse {

struct GkConfig {
  double epsilon = 0.05;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  double rescale_threshold = 1e150;
  std::optional<std::uint64_t> override_N;  // horizon used for the step sizes
  std::optional<std::uint64_t> steps;       // defaults to the horizon
  bool alternate = false;                   // sequential instead of simultaneous updates
  bool trace = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("gk: epsilon must be positive");
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("gk: sigma must lie in (0, 1)");
    if (!(rescale_threshold > 1.0) || !std::isfinite(rescale_threshold))
      throw std::invalid_argument("gk: rescale threshold must be finite and > 1");
    if (override_N && *override_N == 0) throw std::invalid_argument("gk: N must be positive");
  }
};

/// N = ceil(16 (ln(2n) + 8 ln(2/sigma)) / eps^2) steps give ||A x_bar||_inf <= eps
/// with probability >= 1 - sigma.
inline std::uint64_t gk_iterations(std::size_t n, double epsilon, double sigma) {
  if (n < 1 || !(epsilon > 0.0) || !(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("gk_iterations: invalid arguments");
  const double nd = static_cast<double>(n);
  return static_cast<std::uint64_t>(
      std::ceil(16.0 * (std::log(2.0 * nd) + 8.0 * std::log(2.0 / sigma)) / (epsilon * epsilon)));
}

/// High-probability bound on player B's regret after N plays.
inline double gk_regret_bound(std::size_t n, std::uint64_t horizon, double sigma) {
  return std::sqrt(2.0 / static_cast<double>(horizon)) *
         (std::sqrt(std::log(static_cast<double>(n))) + 2.0 * std::sqrt(2.0 * std::log(1.0 / sigma)));
}

class GkSolver {
 public:
  GkSolver(const DualSparseMatrix& a, GkConfig cfg) : a_(&a), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    if (!a.square()) throw std::invalid_argument("gk: operator must be square");
    for (const double v : a.by_rows().values())
      if (std::abs(v) > 1.0) throw std::invalid_argument("gk: payoff entries must lie in [-1, 1]");
    n_ = a.n_cols();
    horizon_ = cfg_.override_N ? *cfg_.override_N : gk_iterations(n_, cfg_.epsilon, cfg_.sigma);
    const double h = static_cast<double>(horizon_);
    eta_b_ = std::sqrt(2.0 * std::log(static_cast<double>(n_)) / h);
    eta_a_ = std::sqrt(2.0 * std::log(2.0 * static_cast<double>(n_)) / h);
    w_b_ = WeightTree::uniform(n_);
    w_a_ = WeightTree::uniform(2 * n_);
    counts_x_.assign(n_, 0);
    counts_w_.assign(2 * n_, 0);
  }

  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t k() const { return k_; }
  double eta_b() const { return eta_b_; }
  double eta_a() const { return eta_a_; }
  const WeightTree& weights_b() const { return w_b_; }
  const WeightTree& weights_a() const { return w_a_; }
  WeightTree& mutable_weights_b() { return w_b_; }
  WeightTree& mutable_weights_a() { return w_a_; }
  const std::vector<std::uint64_t>& counts_x() const { return counts_x_; }
  const std::vector<std::uint64_t>& counts_w() const { return counts_w_; }
  std::uint64_t rescale_count() const { return rescales_; }
  double log_max_weight_b() const { return log_max_b_; }
  double log_max_weight_a() const { return log_max_a_; }
  /// Sum over plays of A~[i(k), j(k)].
  double realized_loss_sum() const { return loss_sum_; }
  std::size_t last_column() const { return last_j_; }
  std::size_t last_row() const { return last_i_; }

  void step() {
    std::size_t j = 0, i = 0;
    if (!cfg_.alternate) {
      j = w_b_.sample(rng_);
      i = w_a_.sample(rng_);
      update_a(j);
      update_b(i);
    } else {
      j = w_b_.sample(rng_);
      update_a(j);
      i = w_a_.sample(rng_);
      update_b(i);
    }
    ++counts_x_[j];
    ++counts_w_[i];
    loss_sum_ += payoff(i, j);
    last_i_ = i;
    last_j_ = j;
    ++k_;
    maybe_rescale(w_b_, touched_max_b_, log_scale_b_);
    maybe_rescale(w_a_, touched_max_a_, log_scale_a_);
  }

  /// A~[i, j] for i in [0, 2n).
  double payoff(std::size_t i, std::size_t j) const {
    return i < n_ ? a_->at(i, j) : -a_->at(i - n_, j);
  }

  DenseVector average_x() const { return normalize(counts_x_); }
  DenseVector average_w() const { return normalize(counts_w_); }

  /// Shannon entropy of the normalized player-B distribution.
  double entropy_b() const {
    const double total = w_b_.total();
    double h = 0.0;
    for (const double w : w_b_.leaves()) {
      if (w <= 0.0) continue;
      const double p = w / total;
      h -= p * std::log(p);
    }
    return h;
  }

 private:
  DenseVector normalize(const std::vector<std::uint64_t>& c) const {
    DenseVector v(c.size(), 0.0);
    if (k_ == 0) return v;
    for (std::size_t t = 0; t < c.size(); ++t)
      v[t] = static_cast<double>(c[t]) / static_cast<double>(k_);
    return v;
  }

  // Player B reacts to A's row i: w_b[j] *= exp(-eta_b * A~[i, j]).
  void update_b(std::size_t i) {
    const bool negated = i >= n_;
    const auto row = a_->row(negated ? i - n_ : i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      const double payoff = negated ? -row.vals[t] : row.vals[t];
      const std::size_t j = row.cols[t];
      const double w = w_b_.weight(j) * std::exp(-eta_b_ * payoff);
      set_weight(w_b_, j, w, touched_max_b_);
      log_max_b_ = std::max(log_max_b_, std::log(w) - log_scale_b_);
    }
  }

  // Player A reacts to B's column j: w_a[i] *= exp(eta_a * A[i, j]) and
  // w_a[i + n] *= exp(-eta_a * A[i, j]).
  void update_a(std::size_t j) {
    const auto col = a_->col(j);
    for (std::size_t t = 0; t < col.size(); ++t) {
      const std::size_t i = col.cols[t];
      const double e = eta_a_ * col.vals[t];
      const double up = w_a_.weight(i) * std::exp(e);
      const double down = w_a_.weight(i + n_) * std::exp(-e);
      set_weight(w_a_, i, up, touched_max_a_);
      set_weight(w_a_, i + n_, down, touched_max_a_);
      log_max_a_ = std::max({log_max_a_, std::log(up) - log_scale_a_, std::log(down) - log_scale_a_});
    }
  }

  static void set_weight(WeightTree& t, std::size_t i, double w, double& touched_max) {
    if (!std::isfinite(w)) throw std::runtime_error("gk: weight overflowed to a nonfinite value");
    t.update(i, w);
    touched_max = std::max(touched_max, w);
  }

  void maybe_rescale(WeightTree& t, double& touched_max, double& log_scale) {
    const double threshold = cfg_.rescale_threshold;
    if (touched_max > threshold || t.total() > threshold) {
      const int e = std::ilogb(t.total());
      const double factor = std::ldexp(1.0, -(e + 1));
      t.scale_all(factor);
      log_scale += std::log(factor);
      ++rescales_;
    }
    touched_max = 0.0;
  }

  const DualSparseMatrix* a_;
  GkConfig cfg_;
  std::mt19937_64 rng_;
  std::size_t n_ = 0;
  std::uint64_t horizon_ = 0;
  double eta_b_ = 0.0, eta_a_ = 0.0;
  WeightTree w_b_, w_a_;
  std::vector<std::uint64_t> counts_x_, counts_w_;
  std::uint64_t k_ = 0;
  std::uint64_t rescales_ = 0;
  double touched_max_b_ = 0.0, touched_max_a_ = 0.0;
  double log_scale_b_ = 0.0, log_scale_a_ = 0.0;
  double log_max_b_ = 0.0, log_max_a_ = 0.0;
  double loss_sum_ = 0.0;
  std::size_t last_i_ = 0, last_j_ = 0;
};

/// Endpoint quantities of the regret chain for averaged plays.
struct GkGameSummary {
  double residual_inf = 0.0;  // ||A x_bar||_inf = max_w <w, A~ x_bar>
  double best_fixed_b = 0.0;  // min_x <w_bar, A~ x>
  double avg_loss = 0.0;
  double regret_b = 0.0;
  double regret_a = 0.0;
  double duality_gap = 0.0;
};

inline GkGameSummary gk_summarize(const DualSparseMatrix& a, const GkSolver& s) {
  GkGameSummary g;
  const std::size_t n = a.n_cols();
  const auto x_bar = s.average_x();
  const auto w_bar = s.average_w();
  g.residual_inf = residual_inf(a, x_bar);
  DenseVector signed_w(n);
  for (std::size_t i = 0; i < n; ++i) signed_w[i] = w_bar[i] - w_bar[i + n];
  const auto y = spmv_transposed(a, signed_w);
  g.best_fixed_b = *std::min_element(y.begin(), y.end());
  g.avg_loss = s.k() == 0 ? 0.0 : s.realized_loss_sum() / static_cast<double>(s.k());
  g.regret_b = g.avg_loss - g.best_fixed_b;
  g.regret_a = g.residual_inf - g.avg_loss;
  g.duality_gap = g.residual_inf - g.best_fixed_b;
  return g;
}

inline SolveResult gk_solve(const DualSparseMatrix& a, const GkConfig& cfg) {
  GkSolver solver(a, cfg);
  const std::uint64_t steps = cfg.steps ? *cfg.steps : solver.horizon();
  SolveResult out;
  auto& rep = out.report;
  rep.method = Method::kGk;
  rep.problem.n = a.n_cols();
  rep.seed = cfg.seed;
  GkDiagnostics diag;

  detail::LoopClock clock;
  detail::TraceSchedule schedule;
  clock.start();
  for (std::uint64_t k = 0; k < steps; ++k) {
    solver.step();
    const auto done = solver.k();
    if (cfg.trace && schedule.due(done)) {
      clock.pause();
      rep.trace.push_back({done, clock.elapsed_ns(), residual_inf(a, solver.average_x())});
      diag.trace.push_back({done, solver.log_max_weight_b(), solver.log_max_weight_a(),
                            solver.entropy_b(), solver.rescale_count()});
      schedule.advance(done);
      clock.resume();
    }
  }
  clock.pause();
  rep.wall_time_ns = clock.elapsed_ns();
  rep.iterations = solver.k();
  rep.stop_reason = "fixed_horizon";

  out.x = solver.average_x();
  const auto g = gk_summarize(a, solver);
  if (cfg.trace && (rep.trace.empty() || rep.trace.back().iter != rep.iterations) && rep.iterations > 0) {
    rep.trace.push_back({rep.iterations, rep.wall_time_ns, g.residual_inf});
    diag.trace.push_back({rep.iterations, solver.log_max_weight_b(), solver.log_max_weight_a(),
                          solver.entropy_b(), solver.rescale_count()});
  }
  rep.final_residual_two = residual_two(a, out.x);
  rep.final_residual_inf = g.residual_inf;
  rep.tracked_f = g.residual_inf;
  rep.min_x = *std::min_element(out.x.begin(), out.x.end());
  rep.success = rep.iterations > 0 && g.residual_inf <= cfg.epsilon;

  diag.horizon = solver.horizon();
  diag.eta_b = solver.eta_b();
  diag.eta_a = solver.eta_a();
  diag.rescale_count = solver.rescale_count();
  diag.log_max_weight_b = solver.log_max_weight_b();
  diag.log_max_weight_a = solver.log_max_weight_a();
  diag.root_b = solver.weights_b().total();
  diag.root_a = solver.weights_a().total();
  diag.entropy_b = solver.entropy_b();
  for (const double w : solver.weights_b().leaves()) diag.zero_weights_b += w == 0.0;
  for (const double w : solver.weights_a().leaves()) diag.zero_weights_a += w == 0.0;
  diag.avg_loss_b = g.avg_loss;
  diag.best_fixed_b = g.best_fixed_b;
  diag.regret_b = g.regret_b;
  diag.regret_bound_b = gk_regret_bound(a.n_cols(), diag.horizon, cfg.sigma);
  diag.best_fixed_a = g.residual_inf;
  diag.regret_a = g.regret_a;
  diag.duality_gap = g.duality_gap;
  rep.gk = std::move(diag);
  return out;
}

}  // namespace prsparse
