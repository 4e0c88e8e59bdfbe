#include "stochsort/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "stochsort/errors.hpp"

namespace stochsort {

namespace {

std::uint32_t cell_along(double x, std::uint32_t count) {
  // Half-open ((j-1)/n, j/n]; counts are powers of two so x * n is exact.
  double scaled = std::ceil(x * static_cast<double>(count));
  if (scaled < 1.0) return 1;
  if (scaled > static_cast<double>(count)) return count;
  return static_cast<std::uint32_t>(scaled);
}

}  // namespace

Box Box::unit(std::size_t d) {
  return Box{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

double Box::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  }
  return std::sqrt(s);
}

void Box::rescale(ValuePoint x, std::span<double> out) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    double w = hi[i] - lo[i];
    double t = w > 0.0 ? (x[i] - lo[i]) / w : 0.0;
    out[i] = std::clamp(t, 0.0, 1.0);
  }
}

Box Box::hull(const Box& other) const {
  Box b = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    b.lo[i] = std::min(lo[i], other.lo[i]);
    b.hi[i] = std::max(hi[i], other.hi[i]);
  }
  return b;
}

BlockPartition::BlockPartition(std::size_t d) : counts_(d, 1) {
  if (d == 0) throw InvalidConfig("partition dimension must be >= 1");
}

BlockPartition::BlockPartition(std::vector<std::uint32_t> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw InvalidConfig("partition dimension must be >= 1");
  for (auto c : counts_) {
    if (c == 0 || (c & (c - 1)) != 0) {
      throw InvalidConfig("block counts must be powers of two");
    }
  }
}

BlockPartition BlockPartition::round_robin(std::size_t d, int splits) {
  BlockPartition p(d);
  for (int r = 0; r < splits; ++r) {
    p = split(p, static_cast<std::size_t>(r) % d + 1);
  }
  return p;
}

std::size_t BlockPartition::block_count() const {
  std::size_t total = 1;
  for (auto c : counts_) total *= c;
  return total;
}

Box BlockPartition::block_box(const GridCoord& v) const {
  Box b = Box::unit(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    double w = 1.0 / counts_[i];
    b.lo[i] = (v[i] - 1) * w;
    b.hi[i] = v[i] * w;
  }
  return b;
}

GridCoord BlockPartition::block_of(ValuePoint x) const {
  GridCoord v(dim());
  for (std::size_t i = 0; i < dim(); ++i) v[i] = cell_along(x[i], counts_[i]);
  return v;
}

std::size_t BlockPartition::order_index_of(ValuePoint x) const {
  // Dimension i runs forward exactly when the traversal of the dimensions
  // above it has taken an even number of steps.
  std::size_t suffix = 0;
  for (std::size_t i = dim(); i-- > 0;) {
    const std::uint32_t n = counts_[i];
    const std::uint32_t v = cell_along(x[i], n);
    const std::size_t digit = (suffix % 2 == 0) ? v - 1 : n - v;
    suffix = suffix * n + digit;
  }
  return suffix + 1;
}

BlockPartition split(const BlockPartition& partition, std::size_t dim) {
  if (dim < 1 || dim > partition.dim()) {
    throw InvalidConfig("split dimension out of range");
  }
  std::vector<std::uint32_t> counts(partition.counts().begin(),
                                    partition.counts().end());
  counts[dim - 1] *= 2;
  return BlockPartition(std::move(counts));
}

std::vector<GridCoord> serpentine_order(std::span<const std::uint32_t> counts) {
  const std::size_t d = counts.size();
  std::size_t total = 1;
  for (auto c : counts) total *= c;

  std::size_t last = 0;  // highest dimension with more than one block
  for (std::size_t i = 0; i < d; ++i) {
    if (counts[i] > 1) last = i;
  }

  GridCoord v(d, 1);
  std::vector<int> move(d, 1);
  std::vector<GridCoord> order;
  order.reserve(total);
  order.push_back(v);

  auto halted = [&] {
    for (std::size_t i = 0; i < last; ++i) {
      if (v[i] != 1) return false;
    }
    return v[last] == counts[last];
  };

  while (!halted()) {
    std::size_t j = 0;
    while (j < d && (static_cast<long>(v[j]) + move[j] > counts[j] ||
                     static_cast<long>(v[j]) + move[j] < 1)) {
      move[j] = -move[j];
      ++j;
    }
    if (j == d) break;
    v[j] = static_cast<std::uint32_t>(static_cast<long>(v[j]) + move[j]);
    order.push_back(v);
  }
  return order;
}

std::size_t order_index(const GridCoord& v,
                        std::span<const std::uint32_t> counts) {
  std::size_t suffix = 0;
  for (std::size_t i = counts.size(); i-- > 0;) {
    const std::size_t digit =
        (suffix % 2 == 0) ? v[i] - 1 : counts[i] - v[i];
    suffix = suffix * counts[i] + digit;
  }
  return suffix + 1;
}

std::size_t merged_key(std::size_t order_idx, int phase) {
  const std::size_t width = std::size_t{1} << (phase - 1);
  return (order_idx + width - 1) / width;
}

bool grid_adjacent(const GridCoord& a, const GridCoord& b) {
  int differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    if (a[i] + 1 != b[i] && b[i] + 1 != a[i]) return false;
    ++differing;
  }
  return differing == 1;
}

}  // namespace stochsort
