#pragma once

// Benchmark matrix families (banded, random doubly sparse, web graphs) and
// SNAP edge-list ingestion. Every generator returns the row-stochastic P;
// callers apply pagerank_operator() to get A.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prsparse/sparse.hpp"

namespace prsparse {

enum class Family { kDiagonal, kRandomDs, kWebgraph };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::kDiagonal: return "diagonal";
    case Family::kRandomDs: return "random";
    case Family::kWebgraph: return "webgraph";
  }
  return "unknown";
}

inline Family parse_family(const std::string& s) {
  if (s == "diagonal" || s == "diag") return Family::kDiagonal;
  if (s == "random" || s == "random_ds") return Family::kRandomDs;
  if (s == "webgraph" || s == "web") return Family::kWebgraph;
  throw std::invalid_argument("unknown matrix family '" + s + "'");
}

/// Which cells of the band carry mass.
///  kOffDiagonal: 0 < |i - j| <= half-width; the walk always moves. A row
///                with no off-diagonal neighbour (n_d = 1, or n = 1) keeps
///                P(i, i) = 1.
///  kInclusive:   |i - j| <= half-width, diagonal included.
enum class BandStyle { kOffDiagonal, kInclusive };

inline const char* band_style_name(BandStyle b) {
  return b == BandStyle::kOffDiagonal ? "off-diagonal" : "inclusive";
}

inline BandStyle parse_band_style(const std::string& s) {
  if (s == "off-diagonal" || s == "offdiag") return BandStyle::kOffDiagonal;
  if (s == "inclusive") return BandStyle::kInclusive;
  throw std::invalid_argument("unknown band style '" + s + "'");
}

struct ProblemSpec {
  Family family = Family::kDiagonal;
  std::size_t n = 0;
  std::size_t n_d = 1;  // band width, diagonal family
  std::size_t s = 1;    // nonzeros per row/column, random family
  std::uint64_t seed = 0;
  bool random_weights = false;
  BandStyle band = BandStyle::kOffDiagonal;
  std::optional<std::string> source_path;

  /// n_d for the diagonal family, s for the random one, 0 otherwise.
  std::size_t param() const {
    switch (family) {
      case Family::kDiagonal: return n_d;
      case Family::kRandomDs: return s;
      default: return 0;
    }
  }

  void validate() const {
    if (family == Family::kWebgraph) {
      if (!source_path) throw std::invalid_argument("webgraph problem needs a source path");
      return;
    }
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (family == Family::kDiagonal && (n_d % 2 == 0 || n_d > n))
      throw std::invalid_argument("n_d must be odd and at most n");
    if (family == Family::kRandomDs && (s < 1 || s > n))
      throw std::invalid_argument("s must lie in [1, n]");
  }
};

/// Banded P with half-width (n_d - 1) / 2, no wraparound. Row i spreads its
/// mass equally over its band cells (or over positive random weights when
/// random_weights is set), so boundary rows have fewer, larger entries.
inline DualSparseMatrix gen_diagonal(std::size_t n, std::size_t n_d, std::uint64_t seed = 0,
                                     bool random_weights = false,
                                     BandStyle style = BandStyle::kOffDiagonal) {
  if (n < 1) throw std::invalid_argument("gen_diagonal: n must be at least 1");
  if (n_d % 2 == 0 || n_d > n)
    throw std::invalid_argument("gen_diagonal: n_d must be odd and at most n");
  const std::size_t half = (n_d - 1) / 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);

  std::vector<std::uint64_t> start(n + 1, 0);
  std::vector<index_t> cols;
  std::vector<double> vals;
  cols.reserve(n * n_d);
  vals.reserve(n * n_d);
  std::vector<index_t> band;
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    band.clear();
    for (std::size_t j = lo; j <= hi; ++j)
      if (style == BandStyle::kInclusive || j != i) band.push_back(static_cast<index_t>(j));
    if (band.empty()) band.push_back(static_cast<index_t>(i));
    w.assign(band.size(), 1.0);
    if (random_weights)
      for (auto& v : w) v = weight(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t k = 0; k < band.size(); ++k) {
      cols.push_back(band[k]);
      vals.push_back(random_weights ? w[k] / total : 1.0 / static_cast<double>(band.size()));
    }
    start[i + 1] = cols.size();
  }
  return DualSparseMatrix(CsrMatrix(n, n, std::move(start), std::move(cols), std::move(vals)));
}

/// P = (1/s) * sum of s pairwise disjoint permutation matrices: exactly s
/// entries of 1/s in every row and column, hence doubly stochastic.
///
/// Each new permutation is drawn uniformly and then repaired by swapping
/// colliding positions with random partners. After a bounded number of
/// failed repairs the permutation is redrawn; after a bounded number of
/// redraws generation fails.
inline DualSparseMatrix gen_random_ds(std::size_t n, std::size_t s, std::uint64_t seed) {
  if (s < 1 || s > n) throw std::invalid_argument("gen_random_ds: s must lie in [1, n]");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<index_t>> perms;
  perms.reserve(s);

  auto collides = [&](std::size_t row, index_t col) {
    for (const auto& p : perms)
      if (p[row] == col) return true;
    return false;
  };

  constexpr int kRedraws = 64;
  const std::size_t swap_budget = 64 * n + 1024;
  std::vector<index_t> sigma(n);
  for (std::size_t a = 0; a < s; ++a) {
    bool ok = false;
    for (int attempt = 0; attempt < kRedraws && !ok; ++attempt) {
      std::iota(sigma.begin(), sigma.end(), index_t{0});
      std::shuffle(sigma.begin(), sigma.end(), rng);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::size_t budget = swap_budget;
      ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        while (collides(i, sigma[i])) {
          if (budget-- == 0) {
            ok = false;
            break;
          }
          const std::size_t j = pick(rng);
          if (j == i) continue;
          if (!collides(i, sigma[j]) && !collides(j, sigma[i])) std::swap(sigma[i], sigma[j]);
        }
      }
    }
    if (!ok)
      throw std::runtime_error("gen_random_ds: could not build " + std::to_string(s) +
                               " disjoint permutations of size " + std::to_string(n));
    perms.push_back(sigma);
  }

  const double v = 1.0 / static_cast<double>(s);
  std::vector<std::uint64_t> start(n + 1, 0);
  std::vector<index_t> cols(n * s);
  std::vector<double> vals(n * s, v);
  for (std::size_t i = 0; i < n; ++i) {
    start[i + 1] = (i + 1) * s;
    for (std::size_t a = 0; a < s; ++a) cols[i * s + a] = perms[a][i];
    std::sort(cols.begin() + static_cast<std::ptrdiff_t>(i * s),
              cols.begin() + static_cast<std::ptrdiff_t>((i + 1) * s));
  }
  return DualSparseMatrix(CsrMatrix(n, n, std::move(start), std::move(cols), std::move(vals)));
}

struct EdgeList {
  std::size_t n_nodes = 0;
  std::vector<std::pair<index_t, index_t>> edges;
  /// original_id[k] is the id the file used for compact node k.
  std::vector<std::uint64_t> original_id;
};

/// SNAP text edge list: '#' comment lines, blank lines, and whitespace
/// separated "from to" pairs. Ids are compacted to [0, n) in order of first
/// appearance; duplicate edges are collapsed.
inline EdgeList parse_snap_edgelist(std::istream& in) {
  EdgeList g;
  std::unordered_map<std::uint64_t, index_t> compact;
  auto id_of = [&](std::uint64_t raw) {
    auto [it, inserted] = compact.try_emplace(raw, static_cast<index_t>(g.original_id.size()));
    if (inserted) g.original_id.push_back(raw);
    return it->second;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::uint64_t from = 0, to = 0;
    std::string extra;
    if (!(ls >> from >> to) || (ls >> extra))
      throw std::runtime_error("edge list: malformed line " + std::to_string(line_no) + ": '" +
                               line + "'");
    const index_t a = id_of(from);
    const index_t b = id_of(to);
    g.edges.emplace_back(a, b);
  }
  if (g.original_id.empty()) throw std::runtime_error("edge list: empty graph");
  g.n_nodes = g.original_id.size();
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

inline EdgeList load_snap_edgelist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path);
  return parse_snap_edgelist(in);
}

/// Random-walk matrix of a graph: P(i, j) = 1 / outdeg(i) per edge i -> j.
/// A node without out-edges gets P(i, i) = 1.
inline DualSparseMatrix webgraph_to_P(const EdgeList& g) {
  const std::size_t n = g.n_nodes;
  std::vector<std::uint64_t> start(n + 1, 0);
  for (const auto& [from, to] : g.edges) ++start[from + 1];
  std::vector<std::uint64_t> outdeg(n);
  for (std::size_t i = 0; i < n; ++i) {
    outdeg[i] = start[i + 1];
    if (outdeg[i] == 0) start[i + 1] = 1;
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<index_t> cols(start.back());
  std::vector<double> vals(start.back());
  std::vector<std::uint64_t> cursor(start.begin(), start.end() - 1);
  // Edges are sorted by (from, to), so rows are filled in column order.
  for (const auto& [from, to] : g.edges) {
    const auto k = cursor[from]++;
    cols[k] = to;
    vals[k] = 1.0 / static_cast<double>(outdeg[from]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (outdeg[i] == 0) {
      cols[cursor[i]] = static_cast<index_t>(i);
      vals[cursor[i]] = 1.0;
    }
  }
  return DualSparseMatrix(CsrMatrix(n, n, std::move(start), std::move(cols), std::move(vals)));
}

/// Builds the transition matrix P described by spec.
inline DualSparseMatrix generate_P(const ProblemSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::kDiagonal:
      return gen_diagonal(spec.n, spec.n_d, spec.seed, spec.random_weights, spec.band);
    case Family::kRandomDs:
      return gen_random_ds(spec.n, spec.s, spec.seed);
    case Family::kWebgraph:
      return webgraph_to_P(load_snap_edgelist(*spec.source_path));
  }
  throw std::logic_error("generate_P: unhandled family");
}

}  // namespace prsparse
