#pragma once

// JSON and CSV emission for solve reports. Doubles are written with
// round-trip precision, so to_json/from_json is lossless.

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "prsparse/report.hpp"

namespace prsparse {

inline void to_json(nlohmann::json& j, const TraceRow& r) {
  j = nlohmann::json::array({r.iter, r.elapsed_ns, r.f_value});
}
inline void from_json(const nlohmann::json& j, TraceRow& r) {
  r.iter = j.at(0).get<std::uint64_t>();
  r.elapsed_ns = j.at(1).get<std::int64_t>();
  r.f_value = j.at(2).get<double>();
}

inline void to_json(nlohmann::json& j, const GkTraceRow& r) {
  j = nlohmann::json{{"iter", r.iter},
                     {"log_max_weight_b", r.log_max_weight_b},
                     {"log_max_weight_a", r.log_max_weight_a},
                     {"entropy_b", r.entropy_b},
                     {"rescales", r.rescales}};
}
inline void from_json(const nlohmann::json& j, GkTraceRow& r) {
  j.at("iter").get_to(r.iter);
  j.at("log_max_weight_b").get_to(r.log_max_weight_b);
  j.at("log_max_weight_a").get_to(r.log_max_weight_a);
  j.at("entropy_b").get_to(r.entropy_b);
  j.at("rescales").get_to(r.rescales);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TreeUpdateMetrics, updates, total_levels_climbed, full_height)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ProblemSummary, family, n, param, seed, source)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GkDiagnostics, horizon, eta_b, eta_a, rescale_count,
                                   log_max_weight_b, log_max_weight_a, root_b, root_a,
                                   entropy_b, zero_weights_b, zero_weights_a, avg_loss_b,
                                   best_fixed_b, regret_b, regret_bound_b, best_fixed_a,
                                   regret_a, duality_gap, rng, trace)

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = nlohmann::json{{"method", method_name(r.method)},
                     {"problem", r.problem},
                     {"iterations", r.iterations},
                     {"wall_time_ns", r.wall_time_ns},
                     {"final_residual_two", r.final_residual_two},
                     {"final_residual_inf", r.final_residual_inf},
                     {"tracked_f", r.tracked_f},
                     {"success", r.success},
                     {"stop_reason", r.stop_reason},
                     {"min_x", r.min_x},
                     {"trace", r.trace},
                     {"tree_metrics", r.tree_metrics},
                     {"seed", r.seed}};
  if (r.gk) j["gk_diagnostics"] = *r.gk;
}

inline void from_json(const nlohmann::json& j, SolveReport& r) {
  r.method = parse_method(j.at("method").get<std::string>());
  j.at("problem").get_to(r.problem);
  j.at("iterations").get_to(r.iterations);
  j.at("wall_time_ns").get_to(r.wall_time_ns);
  j.at("final_residual_two").get_to(r.final_residual_two);
  j.at("final_residual_inf").get_to(r.final_residual_inf);
  j.at("tracked_f").get_to(r.tracked_f);
  j.at("success").get_to(r.success);
  j.at("stop_reason").get_to(r.stop_reason);
  j.at("min_x").get_to(r.min_x);
  j.at("trace").get_to(r.trace);
  j.at("tree_metrics").get_to(r.tree_metrics);
  j.at("seed").get_to(r.seed);
  if (j.contains("gk_diagnostics"))
    r.gk = j.at("gk_diagnostics").get<GkDiagnostics>();
  else
    r.gk.reset();
}

/// CSV trace with header "iter,elapsed_ns,f_value".
inline void write_trace_csv(std::ostream& os, const SolveReport& r) {
  os << "iter,elapsed_ns,f_value\n";
  os.precision(17);
  for (const auto& row : r.trace) os << row.iter << ',' << row.elapsed_ns << ',' << row.f_value << '\n';
}

/// Two plot-ready files: "<prefix>.iter.dat" with (iteration, f) and
/// "<prefix>.time.dat" with (elapsed seconds, f).
inline void write_plotdata(const SolveReport& r, const std::string& prefix) {
  if (r.trace.empty()) throw std::invalid_argument("plotdata: report has an empty trace");
  std::ofstream by_iter(prefix + ".iter.dat");
  std::ofstream by_time(prefix + ".time.dat");
  if (!by_iter || !by_time) throw std::runtime_error("plotdata: cannot write " + prefix + ".*.dat");
  by_iter.precision(17);
  by_time.precision(17);
  for (const auto& row : r.trace) {
    by_iter << row.iter << ' ' << row.f_value << '\n';
    by_time << static_cast<double>(row.elapsed_ns) * 1e-9 << ' ' << row.f_value << '\n';
  }
}

}  // namespace prsparse
