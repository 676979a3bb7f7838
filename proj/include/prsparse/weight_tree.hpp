#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prsparse {

/// A uniform double in [0, 1) from exactly one engine call (53 random bits).
template <typename Engine>
double uniform_unit(Engine& rng) {
  static_assert(Engine::max() - Engine::min() == ~std::uint64_t{0},
                "uniform_unit expects a 64-bit engine");
  return static_cast<double>((rng() - Engine::min()) >> 11) * 0x1.0p-53;
}

/// Binary tree of nonnegative weights with internal node = left + right.
/// Supports O(log n) leaf updates and O(log n) sampling of a leaf with
/// probability proportional to its weight, from unnormalized weights.
class WeightTree {
 public:
  WeightTree() = default;

  explicit WeightTree(std::span<const double> weights) : n_(weights.size()) {
    if (weights.empty()) throw std::invalid_argument("WeightTree: empty input");
    cap_ = std::bit_ceil(n_);
    nodes_.assign(2 * cap_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      check_weight(weights[i]);
      nodes_[cap_ + i] = weights[i];
    }
    for (std::size_t v = cap_ - 1; v >= 1; --v) nodes_[v] = nodes_[2 * v] + nodes_[2 * v + 1];
    if (!(total() > 0.0)) throw std::invalid_argument("WeightTree: all weights are zero");
  }

  /// Uniform tree with the given weight per leaf.
  static WeightTree uniform(std::size_t n, double w = 1.0) {
    return WeightTree(std::vector<double>(n, w));
  }

  std::size_t size() const { return n_; }
  double total() const { return nodes_[1]; }
  double weight(std::size_t i) const { return nodes_[cap_ + i]; }
  std::uint32_t height() const { return static_cast<std::uint32_t>(std::countr_zero(cap_)); }

  void update(std::size_t i, double w) {
    if (i >= n_)
      throw std::out_of_range("WeightTree: index " + std::to_string(i) + " out of range");
    check_weight(w);
    std::size_t v = cap_ + i;
    nodes_[v] = w;
    // Recomputed from the children, never by adding a delta, so every node is
    // exactly the rounded sum of its children.
    for (v >>= 1; v >= 1; v >>= 1) nodes_[v] = nodes_[2 * v] + nodes_[2 * v + 1];
  }

  /// Draws r in [0, total) once and walks down: left if r <= left weight,
  /// otherwise subtract the left weight and go right. Zero-weight subtrees are
  /// never entered.
  template <typename Engine>
  std::size_t sample(Engine& rng) const {
    if (!(total() > 0.0)) throw std::logic_error("WeightTree: sampling with zero total");
    double r = uniform_unit(rng) * total();
    return descend(r);
  }

  std::size_t descend(double r) const {
    std::size_t v = 1;
    while (v < cap_) {
      const double left = nodes_[2 * v];
      const double right = nodes_[2 * v + 1];
      if ((r <= left && left > 0.0) || right == 0.0) {
        v = 2 * v;
      } else {
        r -= left;
        v = 2 * v + 1;
      }
    }
    return v - cap_;
  }

  /// Multiplies every node by factor. A power-of-two factor is exact, so the
  /// tree (and every future draw) is unchanged up to the common scale.
  void scale_all(double factor) {
    if (!std::isfinite(factor) || !(factor > 0.0))
      throw std::invalid_argument("WeightTree: scale factor must be positive and finite");
    if (factor == 1.0) return;
    for (auto& w : nodes_) w *= factor;
  }

  /// Largest |node - (left + right)| over internal nodes, for consistency checks.
  double max_sum_defect() const {
    double worst = 0.0;
    for (std::size_t v = 1; v < cap_; ++v)
      worst = std::max(worst, std::abs(nodes_[v] - (nodes_[2 * v] + nodes_[2 * v + 1])));
    return worst;
  }

  std::span<const double> leaves() const { return {nodes_.data() + cap_, n_}; }

  friend bool operator==(const WeightTree&, const WeightTree&) = default;

 private:
  static void check_weight(double w) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("WeightTree: weights must be finite and nonnegative");
  }

  std::size_t n_ = 0;
  std::size_t cap_ = 1;
  std::vector<double> nodes_;
};

}  // namespace prsparse
