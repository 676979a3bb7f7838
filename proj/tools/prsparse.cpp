// prsparse: generate benchmark matrices, run the solvers, sweep benchmarks
// and turn report traces into plot data.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prsparse/prsparse.hpp"
#include "prsparse/report_json.hpp"

namespace {

using namespace prsparse;
using nlohmann::json;

struct ProblemFlags {
  std::string family = "diagonal";
  std::size_t n = 1000;
  std::size_t nd = 3;
  std::size_t s = 3;
  std::uint64_t seed = 0;
  bool random_weights = false;
  std::string band = "off-diagonal";
  std::string source;

  void attach(CLI::App* app) {
    app->add_option("--family", family, "diagonal | random | webgraph")->capture_default_str();
    app->add_option("--n", n, "dimension")->capture_default_str();
    app->add_option("--nd", nd, "band width (odd), diagonal family")->capture_default_str();
    app->add_option("--s", s, "nonzeros per row/column, random family")->capture_default_str();
    app->add_option("--seed", seed, "generator and solver seed")->capture_default_str();
    app->add_flag("--random-weights", random_weights, "random positive band weights");
    app->add_option("--band", band, "off-diagonal | inclusive")->capture_default_str();
    app->add_option("--source", source, "SNAP edge list (webgraph family)");
  }

  ProblemSpec spec() const {
    ProblemSpec p;
    p.family = parse_family(family);
    p.n = n;
    p.n_d = nd;
    p.s = s;
    p.seed = seed;
    p.random_weights = random_weights;
    p.band = parse_band_style(band);
    if (!source.empty()) p.source_path = source;
    return p;
  }
};

ProblemSummary summarize(const ProblemSpec& p, std::size_t n) {
  ProblemSummary s;
  s.family = family_name(p.family);
  s.n = n;
  s.param = p.param();
  s.seed = p.seed;
  if (p.source_path) s.source = *p.source_path;
  return s;
}

void print_stats(std::ostream& os, const char* label, const DualSparseMatrix& m) {
  const auto st = sparsity_stats(m);
  os << label << ": n=" << m.n_rows() << " nnz=" << m.nnz() << "\n"
     << "  row nnz min/max/avg: " << st.row_nnz_min << " / " << st.row_nnz_max << " / "
     << st.row_nnz_avg << "\n"
     << "  col nnz min/max/avg: " << st.col_nnz_min << " / " << st.col_nnz_max << " / "
     << st.col_nnz_avg << "\n";
}

/// A DSM file may hold either P or A. "auto" takes a row-stochastic matrix as
/// P and anything else as A.
DualSparseMatrix operator_from_file(const std::string& path, const std::string& as) {
  auto m = load_dsm(path);
  if (as == "A") return m;
  if (as == "P") return pagerank_operator(m);
  if (as != "auto") throw std::invalid_argument("--as must be auto, P or A");
  return is_row_stochastic(m) ? pagerank_operator(m) : m;
}

struct SolverFlags {
  std::string method = "fw";
  double eps = 1e-4;
  double gamma = 1.0;
  double step_denominator = 8.0;
  std::vector<double> gamma_sweep;
  double sigma = 0.1;
  std::optional<std::uint64_t> max_iters;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> steps;
  bool alternate = false;
#ifdef NDEBUG
  std::uint64_t check_stride = 0;
#else
  std::uint64_t check_stride = 1024;
#endif
  bool trace = true;

  void attach(CLI::App* app, bool sweep) {
    app->add_option("--method", method, "nl1 | fw | gk")->capture_default_str();
    app->add_option("--eps", eps, "target accuracy")->capture_default_str();
    app->add_option("--gamma", gamma, "NL1 penalty weight")->capture_default_str();
    app->add_option("--step-denominator", step_denominator, "NL1 step divisor")
        ->capture_default_str();
    if (sweep)
      app->add_option("--gamma-sweep", gamma_sweep, "comma separated NL1 penalty weights")
          ->delimiter(',');
    app->add_option("--sigma", sigma, "GK failure probability")->capture_default_str();
    app->add_option("--max-iters", max_iters, "iteration cap (NL1, FW)");
    app->add_option("--horizon", horizon, "GK horizon N used for the step sizes");
    app->add_option("--steps", steps, "GK steps to run (default: the horizon)");
    app->add_flag("--alternate", alternate, "GK sequential player updates");
    app->add_option("--check-stride", check_stride, "honest recheck period, 0 disables")
        ->capture_default_str();
  }
};

SolveResult run_solver(const DualSparseMatrix& a, const SolverFlags& f, double gamma,
                       std::uint64_t seed) {
  switch (parse_method(f.method)) {
    case Method::kNl1: {
      Nl1Config c;
      c.epsilon = f.eps;
      c.gamma = gamma;
      c.step_denominator = f.step_denominator;
      if (f.max_iters) c.max_iters = *f.max_iters;
      c.check_stride = f.check_stride;
      c.trace = f.trace;
      return nl1_solve(a, c);
    }
    case Method::kFw: {
      FwConfig c;
      c.epsilon = f.eps;
      if (f.max_iters) c.max_iters = *f.max_iters;
      c.check_stride = f.check_stride;
      c.trace = f.trace;
      return fw_solve(a, c);
    }
    case Method::kGk: {
      GkConfig c;
      c.epsilon = f.eps;
      c.sigma = f.sigma;
      c.seed = seed;
      c.override_N = f.horizon;
      c.steps = f.steps;
      c.alternate = f.alternate;
      c.trace = f.trace;
      return gk_solve(a, c);
    }
  }
  throw std::logic_error("unhandled method");
}

std::string sweep_path(const std::string& path, double gamma) {
  std::ostringstream os;
  const auto dot = path.rfind('.');
  os << (dot == std::string::npos ? path : path.substr(0, dot)) << ".gamma" << gamma
     << (dot == std::string::npos ? "" : path.substr(dot));
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SOLVER_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

struct BenchJob {
  ProblemSpec spec;
  std::string method;
};

struct BenchRow {
  std::string family;
  std::size_t n = 0;
  std::size_t param = 0;
  std::string method;
  double time_s = 0.0;
  std::uint64_t iterations = 0;
  bool success = false;
};

int cmd_generate(const ProblemFlags& pf, const std::string& out, const std::string& operator_out) {
  const auto spec = pf.spec();
  const auto p = generate_P(spec);
  save_dsm(out, p);
  const auto a = pagerank_operator(p);
  if (!operator_out.empty()) save_dsm(operator_out, a);
  print_stats(std::cout, "P", p);
  print_stats(std::cout, "A", a);
  return 0;
}

int cmd_solve(const ProblemFlags& pf, SolverFlags sf, const std::string& matrix,
              const std::string& as, const std::string& out, const std::string& trace) {
  ProblemSpec spec;
  DualSparseMatrix a;
  if (!matrix.empty()) {
    a = operator_from_file(matrix, as);
    spec.family = Family::kWebgraph;
    spec.n = a.n_cols();
  } else {
    spec = pf.spec();
    a = pagerank_operator(generate_P(spec));
  }
  ProblemSummary summary = summarize(spec, a.n_cols());
  if (!matrix.empty()) {
    summary.family = "matrix";
    summary.param = 0;
    summary.source = matrix;
  }

  std::vector<double> gammas = sf.gamma_sweep.empty() ? std::vector<double>{sf.gamma} : sf.gamma_sweep;
  if (gammas.size() > 1 && parse_method(sf.method) != Method::kNl1)
    throw CLI::ValidationError("--gamma-sweep", "only meaningful with --method nl1");
  json reports = json::array();
  bool all_ok = true;
  for (const double g : gammas) {
    auto res = run_solver(a, sf, g, pf.seed);
    res.report.problem = summary;
    res.report.seed = pf.seed;
    all_ok = all_ok && res.report.success;
    if (!trace.empty()) {
      std::ofstream t(gammas.size() > 1 ? sweep_path(trace, g) : trace);
      if (!t) throw std::runtime_error("cannot write trace " + trace);
      write_trace_csv(t, res.report);
    }
    json j = res.report;
    if (gammas.size() > 1) j["gamma"] = g;
    reports.push_back(std::move(j));
    std::cerr << method_name(res.report.method) << ": iterations=" << res.report.iterations
              << " time_s=" << static_cast<double>(res.report.wall_time_ns) * 1e-9
              << " residual_inf=" << res.report.final_residual_inf
              << " success=" << (res.report.success ? "true" : "false") << "\n";
  }
  const json doc = gammas.size() == 1 ? reports.front() : reports;
  write_text(out, doc.dump(2) + "\n");
  return all_ok ? 0 : 1;
}

int cmd_bench(const std::vector<std::string>& suites, std::vector<std::size_t> ns,
              std::vector<std::size_t> params, const std::vector<std::string>& methods,
              const std::vector<std::string>& graphs, SolverFlags sf, std::uint64_t seed,
              const std::string& out) {
  if (suites.empty()) throw CLI::ValidationError("--suite", "select at least one suite");
  if (ns.empty()) ns = {100, 1000, 10000, 100000};
  std::vector<BenchJob> jobs;
  for (const auto& suite : suites) {
    if (suite == "diag" || suite == "random") {
      const bool diag = suite == "diag";
      const auto ps = params.empty() ? std::vector<std::size_t>{3, 11} : params;
      for (const auto n : ns)
        for (const auto p : ps)
          for (const auto& m : methods) {
            BenchJob job;
            job.spec.family = diag ? Family::kDiagonal : Family::kRandomDs;
            job.spec.n = n;
            job.spec.n_d = p;
            job.spec.s = p;
            job.spec.seed = seed;
            job.spec.validate();
            job.method = m;
            jobs.push_back(job);
          }
    } else if (suite == "web") {
      if (graphs.empty()) throw CLI::ValidationError("--graph", "web suite needs --graph files");
      for (const auto& g : graphs)
        for (const auto& m : methods) {
          BenchJob job;
          job.spec.family = Family::kWebgraph;
          job.spec.source_path = g;
          job.method = m;
          jobs.push_back(job);
        }
    } else {
      throw CLI::ValidationError("--suite", "unknown suite '" + suite + "'");
    }
  }
  for (const auto& m : methods) parse_method(m);

  sf.check_stride = 0;
  sf.trace = false;
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        const auto& job = jobs[k];
        const auto a = pagerank_operator(generate_P(job.spec));
        SolverFlags f = sf;
        f.method = job.method;
        const auto res = run_solver(a, f, f.gamma, job.spec.seed);
        auto& row = rows[k];
        row.family = family_name(job.spec.family);
        row.n = a.n_cols();
        row.param = job.spec.param();
        row.method = method_name(res.report.method);
        row.time_s = static_cast<double>(res.report.wall_time_ns) * 1e-9;
        row.iterations = res.report.iterations;
        row.success = res.report.success;
        std::lock_guard lock(log_mu);
        std::cerr << row.family << " n=" << row.n << " param=" << row.param << " "
                  << row.method << " iterations=" << row.iterations << " time_s=" << row.time_s
                  << (row.success ? "" : " (not converged)") << "\n";
      } catch (...) {
        std::lock_guard lock(log_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<std::size_t>(worker_count(), jobs.size());
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::sort(rows.begin(), rows.end(), [](const BenchRow& x, const BenchRow& y) {
    return std::tie(x.family, x.n, x.param, x.method) < std::tie(y.family, y.n, y.param, y.method);
  });
  std::ostringstream csv;
  csv << "family,n,param,method,time_s,iterations\n";
  csv.precision(9);
  bool all_ok = true;
  for (const auto& r : rows) {
    csv << r.family << ',' << r.n << ',' << r.param << ',' << r.method << ',' << r.time_s << ','
        << r.iterations << '\n';
    all_ok = all_ok && r.success;
  }
  write_text(out, csv.str());
  return all_ok ? 0 : 1;
}

int cmd_plotdata(const std::string& report_path, const std::string& prefix) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open report " + report_path);
  const json doc = json::parse(in);
  if (doc.is_array()) {
    if (doc.empty()) throw std::runtime_error("report file holds no reports");
    for (std::size_t k = 0; k < doc.size(); ++k)
      write_plotdata(doc[k].get<SolveReport>(), prefix + "." + std::to_string(k));
  } else {
    write_plotdata(doc.get<SolveReport>(), prefix);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PageRank as min ||Ax|| over the simplex: sparse NL1, Frank-Wolfe and GK solvers"};
  app.require_subcommand(1);

  ProblemFlags gen_pf;
  std::string gen_out, gen_operator_out;
  auto* gen = app.add_subcommand("generate", "write P of a benchmark family as a DSM1 file");
  gen_pf.attach(gen);
  gen->add_option("--out", gen_out, "output DSM1 file for P")->required();
  gen->add_option("--operator-out", gen_operator_out, "also write A = P^T - I");

  ProblemFlags solve_pf;
  SolverFlags solve_sf;
  std::string matrix, as = "auto", solve_out, trace;
  auto* solve = app.add_subcommand("solve", "run one solver and print a JSON report");
  solve_pf.attach(solve);
  solve_sf.attach(solve, true);
  solve->add_option("--matrix", matrix, "DSM1 file holding P or A (overrides --family)");
  solve->add_option("--as", as, "how to read --matrix: auto | P | A")->capture_default_str();
  solve->add_option("--out", solve_out, "report JSON path (default stdout)");
  solve->add_option("--trace", trace, "CSV trace path");

  std::string suite_list = "", method_list = "fw,nl1", bench_out;
  std::vector<std::size_t> bench_n, bench_params;
  std::vector<std::string> graphs;
  std::uint64_t bench_seed = 0;
  SolverFlags bench_sf;
  auto* bench = app.add_subcommand("bench", "benchmark sweep, one CSV row per solve");
  bench->add_option("--suite", suite_list, "comma separated: diag, random, web");
  bench->add_option("--n", bench_n, "dimensions (default 1e2..1e5)")->delimiter(',');
  bench->add_option("--param", bench_params, "n_d or s values (default 3,11)")->delimiter(',');
  bench->add_option("--methods", method_list, "comma separated solvers")->capture_default_str();
  bench->add_option("--graph", graphs, "SNAP edge lists for the web suite")->delimiter(',');
  bench->add_option("--seed", bench_seed, "generator seed")->capture_default_str();
  bench_sf.attach(bench, false);
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  std::string report_path, prefix;
  auto* plot = app.add_subcommand("plotdata", "convert a report trace to two-column data files");
  plot->add_option("--report", report_path, "report JSON")->required();
  plot->add_option("--out", prefix, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_generate(gen_pf, gen_out, gen_operator_out);
    if (*solve) return cmd_solve(solve_pf, solve_sf, matrix, as, solve_out, trace);
    if (*bench)
      return cmd_bench(split(suite_list), bench_n, bench_params, split(method_list), graphs,
                       bench_sf, bench_seed, bench_out);
    if (*plot) return cmd_plotdata(report_path, prefix);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
