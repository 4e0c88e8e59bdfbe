#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string_view>
#include <vector>

#include "stochsort/core_model.hpp"
#include "stochsort/geometry.hpp"

namespace stochsort {

enum class StrategyKind { adv_sort_1d, grid_tsp_dd, arrival_order };

std::string_view to_string(StrategyKind kind);

/// Decides the exact cell of each arrival inside one bucket of `capacity`
/// cells. Offsets are 0-based within the bucket; each offset is returned
/// exactly once over the bucket's lifetime.
class InteriorPlacer {
 public:
  explicit InteriorPlacer(std::size_t capacity) : capacity_(capacity) {}
  virtual ~InteriorPlacer() = default;

  std::size_t capacity() const { return capacity_; }
  std::size_t fill() const { return fill_; }
  bool full() const { return fill_ == capacity_; }

  /// Throws BucketFull when no cell is left.
  std::size_t place(ValuePoint x);

 protected:
  virtual std::size_t choose(ValuePoint x) = 0;

 private:
  std::size_t capacity_;
  std::size_t fill_ = 0;
};

/// Lazy segment/class scheme shared by the sorting and grid strategies: the
/// cells are cut into contiguous segments of near-equal length,
/// each segment is bound to the first class that lands in it, and a class
/// whose segments are all full claims the leftmost unbound segment. Once every
/// segment is bound, an arrival without room joins the open segment of the
/// nearest class index (lower class on ties). Segments fill left to right.
class SegmentClassPlacer : public InteriorPlacer {
 public:
  /// segment_count is capped at the capacity; lengths differ by at most one.
  SegmentClassPlacer(std::size_t capacity, std::size_t class_count,
                     std::size_t segment_count);

  /// Length of the first segment; others differ by at most one.
  std::size_t segment_length() const;
  std::size_t segment_count() const { return next_.size(); }
  std::size_t class_count() const { return current_.size(); }

 protected:
  std::size_t choose(ValuePoint x) final;
  virtual std::size_t class_of(ValuePoint x) = 0;

 private:
  static constexpr std::uint32_t kUnbound = ~std::uint32_t{0};

  std::size_t take(std::size_t s);

  std::vector<std::uint32_t> begin_;    // segment s spans [begin_[s], begin_[s+1])
  std::vector<std::uint32_t> owner_;    // class bound to each segment
  std::vector<std::uint32_t> next_;     // next free offset in each segment
  std::vector<std::uint32_t> current_;  // latest segment claimed by a class
  std::set<std::uint32_t> open_classes_;  // classes whose current segment has room
  std::size_t first_unbound_ = 0;
};

/// Reconstruction of the O(sqrt m) adversarial sorting algorithm: values are
/// rescaled to the bucket's interval and classed into ceil(sqrt(m)) equal
/// subintervals, with ceil(sqrt(m)) segments.
class AdvSortPlacer final : public SegmentClassPlacer {
 public:
  AdvSortPlacer(std::size_t capacity, double lo, double hi);
  /// Classes (b_{c-1}, b_c] from caller-supplied nondecreasing boundaries,
  /// e.g. equal-mass quantiles of a known distribution.
  AdvSortPlacer(std::size_t capacity, std::vector<double> class_bounds);

 protected:
  std::size_t class_of(ValuePoint x) override;

 private:
  double lo_ = 0.0;
  double width_ = 0.0;
  std::vector<double> bounds_;  // empty: equal-width classes on [lo, hi]
};

/// d-dimensional analogue: classes are the blocks of a serpentine-ordered
/// sub-grid of the bucket's box, with min(classes, ceil(sqrt(m))) segments.
class GridTspPlacer final : public SegmentClassPlacer {
 public:
  GridTspPlacer(std::size_t capacity, Box region);

  /// Number of sub-grid splits used for a bucket of `capacity` cells in
  /// dimension d: max(d, floor(log2 ceil(sqrt m))), capped at ceil(log2 m).
  static int sub_grid_splits(std::size_t capacity, std::size_t d);

  const BlockPartition& sub_grid() const { return sub_grid_; }

 protected:
  std::size_t class_of(ValuePoint x) override;

 private:
  Box region_;
  BlockPartition sub_grid_;
  std::vector<double> scratch_;
};

/// Pure arrival order: the lowest-indexed empty cell.
class ArrivalOrderPlacer final : public InteriorPlacer {
 public:
  using InteriorPlacer::InteriorPlacer;

 protected:
  std::size_t choose(ValuePoint x) override;
};

std::size_t ceil_sqrt(std::size_t m);

std::unique_ptr<InteriorPlacer> make_placer(StrategyKind kind,
                                            std::size_t capacity,
                                            const Box& region);

}  // namespace stochsort
