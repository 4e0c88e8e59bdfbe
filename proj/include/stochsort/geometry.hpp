#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stochsort/core_model.hpp"

namespace stochsort {

/// 1-based block coordinates, one entry per dimension.
using GridCoord = std::vector<std::uint32_t>;

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(std::size_t d);
  std::size_t dim() const { return lo.size(); }
  double diameter() const;
  /// Coordinates of `x` mapped affinely so the box becomes [0,1]^d, clamped.
  void rescale(ValuePoint x, std::span<double> out) const;
  /// Smallest box containing both.
  Box hull(const Box& other) const;
};

/// Grid of equal blocks over [0,1]^d produced by repeated midpoint splits.
class BlockPartition {
 public:
  /// The single block [0,1]^d.
  explicit BlockPartition(std::size_t d);
  explicit BlockPartition(std::vector<std::uint32_t> counts);

  /// `splits` bisections on dimensions 1, 2, ..., d, 1, 2, ... in turn.
  static BlockPartition round_robin(std::size_t d, int splits);

  std::size_t dim() const { return counts_.size(); }
  std::span<const std::uint32_t> counts() const { return counts_; }
  std::size_t block_count() const;

  Box block_box(const GridCoord& v) const;

  /// v_i = min(n_i, ceil(x_i n_i)), with x_i = 0 mapped to 1.
  GridCoord block_of(ValuePoint x) const;

  /// 1-based serpentine position of the block containing x, without
  /// materializing the coordinate.
  std::size_t order_index_of(ValuePoint x) const;

 private:
  std::vector<std::uint32_t> counts_;
};

/// Bisects every block perpendicular to dimension `dim` (1-based).
BlockPartition split(const BlockPartition& partition, std::size_t dim);

/// Boustrophedon traversal of the grid: from (1,...,1), step the lowest
/// dimension whose move stays in range, reversing every dimension passed
/// over. Trailing dimensions with a single block are ignored for the halting
/// test, so the traversal always covers the grid.
std::vector<GridCoord> serpentine_order(std::span<const std::uint32_t> counts);

/// Closed-form 1-based position of `v` in serpentine_order(counts).
std::size_t order_index(const GridCoord& v,
                        std::span<const std::uint32_t> counts);

/// Bucket key (1-based) of an order index at phase `phase`: phase i merges
/// 2^{i-1} consecutive blocks.
std::size_t merged_key(std::size_t order_idx, int phase);

/// True when a and b differ in exactly one coordinate, by exactly 1.
bool grid_adjacent(const GridCoord& a, const GridCoord& b);

}  // namespace stochsort
