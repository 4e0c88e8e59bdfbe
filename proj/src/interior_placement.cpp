#include "stochsort/interior_placement.hpp"

#include <algorithm>
#include <cmath>

#include "stochsort/errors.hpp"

namespace stochsort {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::adv_sort_1d: return "adv_sort_1d";
    case StrategyKind::grid_tsp_dd: return "grid_tsp_dd";
    case StrategyKind::arrival_order: return "arrival_order";
  }
  return "unknown";
}

std::size_t ceil_sqrt(std::size_t m) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(m)));
  while (r * r < m) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= m) --r;
  return r;
}

std::size_t InteriorPlacer::place(ValuePoint x) {
  if (full()) throw BucketFull("bucket of " + std::to_string(capacity_) + " cells");
  std::size_t offset = choose(x);
  ++fill_;
  return offset;
}

SegmentClassPlacer::SegmentClassPlacer(std::size_t capacity,
                                       std::size_t class_count,
                                       std::size_t segment_count)
    : InteriorPlacer(capacity) {
  const std::size_t segments = std::min(capacity, segment_count);
  begin_.resize(segments + 1);
  for (std::size_t s = 0; s <= segments; ++s) {
    begin_[s] = static_cast<std::uint32_t>(s * capacity / std::max<std::size_t>(1, segments));
  }
  owner_.assign(segments, kUnbound);
  next_.assign(begin_.begin(), begin_.end() - (segments > 0 ? 1 : 0));
  if (segments == 0) next_.clear();
  current_.assign(std::max<std::size_t>(1, class_count), kUnbound);
}

std::size_t SegmentClassPlacer::segment_length() const {
  return next_.empty() ? 0 : begin_[1] - begin_[0];
}

std::size_t SegmentClassPlacer::take(std::size_t s) {
  std::size_t offset = next_[s]++;
  if (next_[s] == begin_[s + 1]) open_classes_.erase(owner_[s]);
  return offset;
}

std::size_t SegmentClassPlacer::choose(ValuePoint x) {
  const std::size_t c = std::min(class_of(x), current_.size() - 1);
  const std::uint32_t seg = current_[c];
  if (seg != kUnbound && next_[seg] < begin_[seg + 1]) return take(seg);
  // Skip empty segments (possible only when m < number of segments).
  while (first_unbound_ < owner_.size() && begin_[first_unbound_] == begin_[first_unbound_ + 1]) {
    ++first_unbound_;
  }
  if (first_unbound_ < owner_.size()) {
    const std::size_t s = first_unbound_++;
    owner_[s] = static_cast<std::uint32_t>(c);
    current_[c] = static_cast<std::uint32_t>(s);
    open_classes_.insert(static_cast<std::uint32_t>(c));
    return take(s);
  }
  // Every segment is bound: extend the open segment of the nearest class.
  auto hi = open_classes_.lower_bound(static_cast<std::uint32_t>(c));
  auto pick = hi;
  if (hi == open_classes_.end() || (hi != open_classes_.begin() && c - *std::prev(hi) <= *hi - c)) {
    pick = std::prev(hi);
  }
  return take(current_[*pick]);
}

AdvSortPlacer::AdvSortPlacer(std::size_t capacity, double lo, double hi)
    : SegmentClassPlacer(capacity, ceil_sqrt(capacity), ceil_sqrt(capacity)), lo_(lo), width_(hi - lo) {}

AdvSortPlacer::AdvSortPlacer(std::size_t capacity, std::vector<double> class_bounds)
    : SegmentClassPlacer(capacity, class_bounds.size() > 1 ? class_bounds.size() - 1 : 1,
                         ceil_sqrt(capacity)),
      bounds_(std::move(class_bounds)) {}

std::size_t AdvSortPlacer::class_of(ValuePoint x) {
  if (!bounds_.empty()) {
    auto it = std::lower_bound(bounds_.begin() + 1, bounds_.end(), x[0]);
    if (it == bounds_.end()) return class_count() - 1;
    return static_cast<std::size_t>(it - bounds_.begin()) - 1;
  }
  const double t = width_ > 0.0 ? std::clamp((x[0] - lo_) / width_, 0.0, 1.0) : 0.0;
  const double g = static_cast<double>(class_count());
  const double c = std::ceil(t * g);
  return c < 1.0 ? 0 : static_cast<std::size_t>(c) - 1;
}

int GridTspPlacer::sub_grid_splits(std::size_t capacity, std::size_t d) {
  if (capacity <= 1) return 0;
  int lg_sqrt = 0;
  for (std::size_t r = ceil_sqrt(capacity); r > 1; r >>= 1) ++lg_sqrt;
  int lg_cap = 0;
  while ((std::size_t{1} << lg_cap) < capacity) ++lg_cap;
  return std::min(std::max(static_cast<int>(d), lg_sqrt), lg_cap);
}

GridTspPlacer::GridTspPlacer(std::size_t capacity, Box region)
    : SegmentClassPlacer(capacity,
                         std::size_t{1} << sub_grid_splits(capacity, region.dim()),
                         std::min(std::size_t{1} << sub_grid_splits(capacity, region.dim()),
                                  ceil_sqrt(capacity))),
      region_(std::move(region)),
      sub_grid_(BlockPartition::round_robin(
          region_.dim(), sub_grid_splits(capacity, region_.dim()))),
      scratch_(region_.dim()) {}

std::size_t GridTspPlacer::class_of(ValuePoint x) {
  region_.rescale(x, scratch_);
  return sub_grid_.order_index_of(scratch_) - 1;
}

std::size_t ArrivalOrderPlacer::choose(ValuePoint) { return fill(); }

std::unique_ptr<InteriorPlacer> make_placer(StrategyKind kind,
                                            std::size_t capacity,
                                            const Box& region) {
  switch (kind) {
    case StrategyKind::adv_sort_1d:
      return std::make_unique<AdvSortPlacer>(capacity, region.lo[0], region.hi[0]);
    case StrategyKind::grid_tsp_dd:
      return std::make_unique<GridTspPlacer>(capacity, region);
    case StrategyKind::arrival_order:
      return std::make_unique<ArrivalOrderPlacer>(capacity);
  }
  throw InvalidConfig("unknown strategy");
}

}  // namespace stochsort
