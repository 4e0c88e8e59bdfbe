#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "stochsort/geometry.hpp"
#include "stochsort/rng.hpp"

using namespace stochsort;

namespace {

using Counts = std::vector<std::uint32_t>;

// Every power-of-2 grid with at most `max_blocks` blocks in d dimensions.
void for_each_grid(std::size_t d, std::size_t max_blocks, Counts& cur,
                   const auto& visit) {
  if (cur.size() == d) {
    visit(cur);
    return;
  }
  std::size_t prod = 1;
  for (auto c : cur) prod *= c;
  for (std::uint32_t c = 1; prod * c <= max_blocks; c *= 2) {
    cur.push_back(c);
    for_each_grid(d, max_blocks, cur, visit);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("split and round robin") {
  BlockPartition unit(2);
  auto halves = split(unit, 1);
  CHECK(halves.counts()[0] == 2);
  CHECK(halves.counts()[1] == 1);
  Box left = halves.block_box({1, 1});
  CHECK(left.lo == std::vector<double>{0, 0});
  CHECK(left.hi == std::vector<double>{0.5, 1});
  auto quad = split(halves, 2);
  CHECK(quad.block_count() == 4);
  auto rr = BlockPartition::round_robin(2, 3);
  CHECK(rr.counts()[0] == 4);
  CHECK(rr.counts()[1] == 2);
}

TEST_CASE("serpentine examples") {
  CHECK(serpentine_order(Counts{4}) ==
        std::vector<GridCoord>{{1}, {2}, {3}, {4}});
  CHECK(serpentine_order(Counts{2, 2}) ==
        std::vector<GridCoord>{{1, 1}, {2, 1}, {2, 2}, {1, 2}});
  CHECK(serpentine_order(Counts{2, 2, 2}) ==
        std::vector<GridCoord>{{1, 1, 1}, {2, 1, 1}, {2, 2, 1}, {1, 2, 1},
                               {1, 2, 2}, {2, 2, 2}, {2, 1, 2}, {1, 1, 2}});
  CHECK(order_index({1, 1}, Counts{2, 2}) == 1);
  CHECK(order_index({1, 2}, Counts{2, 2}) == 4);
}

TEST_CASE("serpentine order covers, is adjacent and matches order_index") {
  for (std::size_t d = 1; d <= 4; ++d) {
    Counts cur;
    for_each_grid(d, 4096, cur, [&](const Counts& counts) {
      auto order = serpentine_order(counts);
      std::size_t total = 1;
      for (auto c : counts) total *= c;
      REQUIRE(order.size() == total);
      std::set<GridCoord> seen(order.begin(), order.end());
      CHECK(seen.size() == total);
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          CHECK(order[i][k] >= 1);
          CHECK(order[i][k] <= counts[k]);
        }
        if (i > 0 && !grid_adjacent(order[i - 1], order[i])) FAIL("not adjacent");
        if (order_index(order[i], counts) != i + 1) FAIL("order_index mismatch");
      }
      // First and last blocks are corners.
      for (std::size_t k = 0; k < d; ++k) {
        CHECK(order.front()[k] == 1);
        CHECK((order.back()[k] == 1 || order.back()[k] == counts[k]));
      }
    });
  }
}

TEST_CASE("block_of") {
  BlockPartition p(Counts{2, 2});
  const double a[] = {0.7, 0.2}, z[] = {0.0, 0.0}, h[] = {0.5, 0.5}, one[] = {1.0, 1.0};
  CHECK(p.block_of(ValuePoint(a, 2)) == GridCoord{2, 1});
  CHECK(p.block_of(ValuePoint(z, 2)) == GridCoord{1, 1});
  CHECK(p.block_of(ValuePoint(h, 2)) == GridCoord{1, 1});
  CHECK(p.block_of(ValuePoint(one, 2)) == GridCoord{2, 2});
}

TEST_CASE("block_of partitions the cube into equal blocks") {
  auto p = BlockPartition::round_robin(3, 5);
  SplitMix64 rng(1);
  std::vector<std::size_t> hits(p.block_count(), 0);
  const std::size_t samples = 64000;
  for (std::size_t t = 0; t < samples; ++t) {
    double x[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    auto v = p.block_of(ValuePoint(x, 3));
    Box b = p.block_box(v);
    for (int k = 0; k < 3; ++k) {
      CHECK(x[k] >= b.lo[k]);
      CHECK(x[k] <= b.hi[k]);
    }
    CHECK(p.order_index_of(ValuePoint(x, 3)) == order_index(v, p.counts()));
    ++hits[order_index(v, p.counts()) - 1];
  }
  // Equal volumes: every block gets about samples / 32 = 2000 hits.
  for (auto h : hits) {
    CHECK(h > 1700);
    CHECK(h < 2300);
  }
  double volume = 1;
  Box b0 = p.block_box({1, 1, 1});
  for (int k = 0; k < 3; ++k) volume *= b0.hi[k] - b0.lo[k];
  CHECK(volume == doctest::Approx(1.0 / 32));
}

TEST_CASE("merged keys") {
  CHECK(merged_key(3, 1) == 3);
  CHECK(merged_key(3, 2) == 2);
  CHECK(merged_key(8, 4) == 1);
}

TEST_CASE("merged blocks are connected") {
  for (std::size_t d = 1; d <= 3; ++d) {
    for (int l = 1; l <= 8; ++l) {
      auto p = BlockPartition::round_robin(d, l);
      auto order = serpentine_order(p.counts());
      for (int phase = 1; phase <= l + 1; ++phase) {
        const std::size_t width = std::size_t{1} << (phase - 1);
        for (std::size_t start = 0; start < order.size(); start += width) {
          // Consecutive serpentine blocks are adjacent, so a run is a path.
          for (std::size_t i = start + 1; i < std::min(order.size(), start + width); ++i) {
            CHECK(grid_adjacent(order[i - 1], order[i]));
            CHECK(merged_key(i + 1, phase) == merged_key(start + 1, phase));
          }
        }
      }
    }
  }
}

TEST_CASE("box helpers") {
  Box u = Box::unit(2);
  CHECK(u.diameter() == doctest::Approx(std::sqrt(2.0)));
  Box b{{0.5, 0.0}, {1.0, 0.5}};
  double out[2];
  const double x[] = {0.75, 0.9};
  b.rescale(ValuePoint(x, 2), out);
  CHECK(out[0] == doctest::Approx(0.5));
  CHECK(out[1] == 1.0);
  Box h = b.hull(Box{{0.0, 0.0}, {0.5, 0.5}});
  CHECK(h.lo == std::vector<double>{0, 0});
  CHECK(h.hi == std::vector<double>{1, 0.5});
}
