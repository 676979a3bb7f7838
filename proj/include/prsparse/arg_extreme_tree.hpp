#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prsparse/sparse.hpp"

namespace prsparse {

struct TreeUpdateMetrics {
  std::uint64_t updates = 0;
  std::uint64_t total_levels_climbed = 0;
  std::uint32_t full_height = 0;

  double average_climb() const {
    return updates == 0 ? 0.0
                        : static_cast<double>(total_levels_climbed) /
                              static_cast<double>(updates);
  }

  TreeUpdateMetrics& operator+=(const TreeUpdateMetrics& o) {
    updates += o.updates;
    total_levels_climbed += o.total_levels_climbed;
    full_height = std::max(full_height, o.full_height);
    return *this;
  }

  friend bool operator==(const TreeUpdateMetrics&, const TreeUpdateMetrics&) = default;
};

struct MinOrder {
  static constexpr double kPad = std::numeric_limits<double>::infinity();
  static bool better(double a, double b) { return a < b; }
};

struct MaxOrder {
  static constexpr double kPad = -std::numeric_limits<double>::infinity();
  static bool better(double a, double b) { return a > b; }
};

/// Tournament tree over (index, value) pairs. Every internal node holds the
/// winner of its two children; the root is the extremum, lowest index on ties.
///
/// The leaf count is padded to a power of two with neutral pairs that cannot
/// beat a finite value. Leaves in a left subtree always carry lower indices
/// than those in the right subtree, so "prefer left on equal values" is the
/// lowest-index tie-break.
///
/// update() recomputes ancestors bottom-up and stops as soon as a recomputed
/// node equals what it already held, since nothing above can change either.
template <typename Order>
class ArgExtremeTree {
 public:
  struct Entry {
    index_t index;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  static constexpr index_t kSentinel = std::numeric_limits<index_t>::max();

  ArgExtremeTree() = default;

  explicit ArgExtremeTree(std::span<const double> values, bool pruning = true)
      : n_(values.size()), pruning_(pruning) {
    if (values.empty()) throw std::invalid_argument("ArgExtremeTree: empty input");
    cap_ = std::bit_ceil(n_);
    metrics_.full_height = static_cast<std::uint32_t>(std::countr_zero(cap_));
    nodes_.assign(2 * cap_, Entry{kSentinel, Order::kPad});
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(values[i]))
        throw std::invalid_argument("ArgExtremeTree: nonfinite value at " +
                                    std::to_string(i));
      nodes_[cap_ + i] = Entry{static_cast<index_t>(i), values[i]};
    }
    for (std::size_t v = cap_ - 1; v >= 1; --v) nodes_[v] = winner(v);
  }

  std::size_t size() const { return n_; }
  std::uint32_t height() const { return metrics_.full_height; }

  Entry top() const { return nodes_[1]; }

  double value(std::size_t i) const { return nodes_[cap_ + i].value; }

  void update(std::size_t i, double v) {
    if (i >= n_)
      throw std::out_of_range("ArgExtremeTree: index " + std::to_string(i) +
                              " out of range");
    std::size_t node = cap_ + i;
    nodes_[node].value = v;
    ++metrics_.updates;
    while (node > 1) {
      node >>= 1;
      ++metrics_.total_levels_climbed;
      const Entry w = winner(node);
      if (pruning_ && w == nodes_[node]) break;
      nodes_[node] = w;
    }
  }

  const TreeUpdateMetrics& metrics() const { return metrics_; }
  void reset_metrics() {
    metrics_.updates = 0;
    metrics_.total_levels_climbed = 0;
  }

 private:
  Entry winner(std::size_t v) const {
    const Entry& l = nodes_[2 * v];
    const Entry& r = nodes_[2 * v + 1];
    return Order::better(r.value, l.value) ? r : l;
  }

  std::size_t n_ = 0;
  std::size_t cap_ = 1;
  bool pruning_ = true;
  // Flat heap layout, root at 1, leaf i at cap_ + i. With cap_ == 1 the root
  // is the single leaf.
  std::vector<Entry> nodes_;
  TreeUpdateMetrics metrics_;
};

using ArgMinTree = ArgExtremeTree<MinOrder>;
using ArgMaxTree = ArgExtremeTree<MaxOrder>;

}  // namespace prsparse
