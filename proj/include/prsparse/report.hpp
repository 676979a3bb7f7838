#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prsparse/arg_extreme_tree.hpp"
#include "prsparse/sparse.hpp"

namespace prsparse {

enum class Method { kNl1, kFw, kGk };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kNl1: return "nl1";
    case Method::kFw: return "fw";
    case Method::kGk: return "gk";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "nl1" || s == "NL1") return Method::kNl1;
  if (s == "fw" || s == "FW") return Method::kFw;
  if (s == "gk" || s == "GK") return Method::kGk;
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct TraceRow {
  std::uint64_t iter = 0;
  std::int64_t elapsed_ns = 0;
  double f_value = 0.0;
  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct GkTraceRow {
  std::uint64_t iter = 0;
  double log_max_weight_b = 0.0;  // natural log, unrescaled scale
  double log_max_weight_a = 0.0;
  double entropy_b = 0.0;         // of the normalized player-B distribution
  std::uint64_t rescales = 0;
  friend bool operator==(const GkTraceRow&, const GkTraceRow&) = default;
};

struct GkDiagnostics {
  std::uint64_t horizon = 0;  // N used for the step sizes
  double eta_b = 0.0;
  double eta_a = 0.0;
  std::uint64_t rescale_count = 0;
  double log_max_weight_b = 0.0;
  double log_max_weight_a = 0.0;
  double root_b = 0.0;
  double root_a = 0.0;
  double entropy_b = 0.0;
  std::uint64_t zero_weights_b = 0;
  std::uint64_t zero_weights_a = 0;
  double avg_loss_b = 0.0;      // (1/N) sum_k <w^k, A~ x^k>
  double best_fixed_b = 0.0;    // min_x <w_bar, A~ x>
  double regret_b = 0.0;
  double regret_bound_b = 0.0;  // sqrt(2/N)(sqrt(ln n) + 2 sqrt(2 ln(1/sigma)))
  double best_fixed_a = 0.0;    // max_w <w, A~ x_bar> = ||A x_bar||_inf
  double regret_a = 0.0;
  double duality_gap = 0.0;
  std::string rng = "mt19937_64";
  std::vector<GkTraceRow> trace;
  friend bool operator==(const GkDiagnostics&, const GkDiagnostics&) = default;
};

struct ProblemSummary {
  std::string family = "matrix";
  std::uint64_t n = 0;
  std::uint64_t param = 0;
  std::uint64_t seed = 0;
  std::string source;
  friend bool operator==(const ProblemSummary&, const ProblemSummary&) = default;
};

struct SolveReport {
  Method method = Method::kFw;
  ProblemSummary problem;
  std::uint64_t iterations = 0;
  std::int64_t wall_time_ns = 0;
  double final_residual_two = 0.0;
  double final_residual_inf = 0.0;
  double tracked_f = 0.0;
  bool success = false;
  std::string stop_reason;
  double min_x = 0.0;
  std::vector<TraceRow> trace;
  TreeUpdateMetrics tree_metrics;
  std::optional<GkDiagnostics> gk;
  std::uint64_t seed = 0;
  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

struct SolveResult {
  SolveReport report;
  DenseVector x;
};

namespace detail {

/// Stopwatch that can be paused around instrumentation (honest rechecks,
/// trace evaluation) so only the optimization loop is timed.
class LoopClock {
 public:
  using clock = std::chrono::steady_clock;

  void start() {
    running_ = true;
    t0_ = clock::now();
  }
  void pause() {
    if (!running_) return;
    acc_ += clock::now() - t0_;
    running_ = false;
  }
  void resume() { start(); }
  std::int64_t elapsed_ns() const {
    auto total = acc_;
    if (running_) total += clock::now() - t0_;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(total).count();
  }

 private:
  bool running_ = false;
  clock::time_point t0_{};
  clock::duration acc_{};
};

/// Geometric trace checkpoints: 0, 1, 2, ... growing by ~10% per point.
class TraceSchedule {
 public:
  bool due(std::uint64_t iter) const { return iter >= next_; }
  void advance(std::uint64_t iter) {
    next_ = std::max<std::uint64_t>(iter + 1,
                                    static_cast<std::uint64_t>(std::ceil(iter * 1.1)));
  }

 private:
  std::uint64_t next_ = 0;
};

}  // namespace detail

}  // namespace prsparse
