#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "stochsort/bucket_engine.hpp"
#include "stochsort/errors.hpp"
#include "stochsort/harness.hpp"
#include "stochsort/report.hpp"
#include "stochsort/rng.hpp"

using namespace stochsort;

namespace {

AlgorithmConfig config(std::size_t n, std::size_t d = 1, double c = 100.0, double p = 2.0) {
  AlgorithmConfig a;
  a.n = n;
  a.d = d;
  a.backyard_constant = c;
  a.log_exponent = p;
  return a;
}

PointSet uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  return sample_points(n, d, DistributionSpec::uniform(), seed);
}

}  // namespace

TEST_CASE("first phase sizes") {
  CHECK(first_phase_sizes(512, 4) == std::vector<std::size_t>{128, 128, 128, 128});
  CHECK(first_phase_sizes(500, 4) == std::vector<std::size_t>{125, 125, 125, 125});
  CHECK(first_phase_sizes(513, 4) == std::vector<std::size_t>{129, 128, 128, 128});
}

TEST_CASE("phase 1 layout from the engine") {
  for (auto [n, sizes] : std::vector<std::pair<std::size_t, std::vector<std::size_t>>>{
           {1024, {128, 128, 128, 128}},
           {1000, {125, 125, 125, 125}},
           {1026, {129, 128, 128, 128}}}) {
    IntervalDomain domain(DistributionSpec::uniform(), compute_ell(n, 2.0));
    Engine e(config(n), domain, StrategyKind::adv_sort_1d);
    REQUIRE(e.phases().size() == 1);
    const auto& p = e.phases()[0];
    CHECK(p.bucket_count == 4);
    CHECK(p.length == n / 2);
    std::vector<std::size_t> got;
    for (const auto& b : p.buckets) got.push_back(b.capacity);
    CHECK(got == sizes);
  }
}

TEST_CASE("toy spawn example") {
  const std::vector<std::size_t> caps{25, 25, 25, 25}, fills{25, 20, 10, 15};
  auto next = next_phase_sizes(caps, fills, 50);
  CHECK(next.bin_capacity == doctest::Approx(40.0));
  CHECK(next.bin_capacities == std::vector<std::size_t>{40, 40});
  CHECK(next.bucket_sizes == std::vector<std::size_t>{35, 15});
  CHECK(next.clamped_bins == 0);
}

TEST_CASE("spawn with no leftovers uses the bin capacities") {
  const std::vector<std::size_t> caps{25, 25, 25, 25};
  auto next = next_phase_sizes(caps, caps, 50);
  CHECK(next.bucket_sizes == next.bin_capacities);
  CHECK(next.bin_capacities == std::vector<std::size_t>{25, 25});
}

TEST_CASE("spawn conserves capacity and clamps") {
  SplitMix64 rng(4);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t k = std::size_t{2} << rng.below(6);
    std::vector<std::size_t> caps(k), fills(k);
    std::size_t a = 0, nfill = 0, left = 0;
    for (std::size_t j = 0; j < k; ++j) {
      caps[j] = rng.below(40);
      fills[j] = caps[j] == 0 ? 0 : rng.below(caps[j] + 1);
      a += caps[j];
      nfill += fills[j];
      left += caps[j] - fills[j];
    }
    const std::size_t next_len = std::max<std::size_t>(left, a / 2);
    auto next = next_phase_sizes(caps, fills, next_len);
    REQUIRE(next.bin_capacities.size() == k / 2);
    std::size_t bins = 0, sizes = 0;
    const auto lo = static_cast<std::size_t>(std::floor(next.bin_capacity));
    for (std::size_t j = 0; j < k / 2; ++j) {
      bins += next.bin_capacities[j];
      sizes += next.bucket_sizes[j];
      CHECK((next.bin_capacities[j] == lo || next.bin_capacities[j] == lo + 1));
    }
    CHECK(bins == a + next_len - nfill);
    CHECK(sizes + left == a + next_len - nfill);
    CHECK(sizes == next_len);
  }
}

TEST_CASE("designated bucket") {
  IntervalDomain d(DistributionSpec::uniform(), 2);
  const double x1 = 0.3, x2 = 0.25, x3 = 0.0, x4 = 1.0;
  CHECK(designated_bucket(1, ValuePoint(&x1, 1), d) == 2);
  CHECK(designated_bucket(1, ValuePoint(&x2, 1), d) == 1);
  CHECK(designated_bucket(1, ValuePoint(&x3, 1), d) == 1);
  CHECK(designated_bucket(1, ValuePoint(&x4, 1), d) == 4);
  CHECK(designated_bucket(2, ValuePoint(&x1, 1), d) == 1);

  // Equal-mass intervals under Q(u) = sqrt(u): boundary at sqrt(1/2).
  auto sq = DistributionSpec::from_quantile([](double u) { return std::sqrt(u); }, "sqrt");
  IntervalDomain s(sq, 1);
  const double below = 0.7071, above = 0.7072;
  CHECK(designated_bucket(1, ValuePoint(&below, 1), s) == 1);
  CHECK(designated_bucket(1, ValuePoint(&above, 1), s) == 2);

  // Bucket 2 covers u in (1/2, 1]; its two classes split at sqrt(3/4).
  auto placer = s.placer(StrategyKind::adv_sort_1d, 4, 0, 1);
  const double lo = 0.8, hi = 0.9, lo2 = 0.85;
  CHECK(placer->place(ValuePoint(&hi, 1)) == 0);
  CHECK(placer->place(ValuePoint(&lo, 1)) == 2);
  CHECK(placer->place(ValuePoint(&lo2, 1)) == 3);
}

TEST_CASE("block domain keys follow merged serpentine order") {
  BlockDomain d(2, 4);
  SplitMix64 rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double x[] = {rng.uniform(), rng.uniform()};
    const auto idx = order_index(d.partition().block_of(ValuePoint(x, 2)), d.partition().counts());
    for (int phase = 1; phase <= 4; ++phase) {
      CHECK(designated_bucket(phase, ValuePoint(x, 2), d) == merged_key(idx, phase));
      Box r = d.region(phase - 1, designated_bucket(phase, ValuePoint(x, 2), d) - 1);
      CHECK(x[0] >= r.lo[0]);
      CHECK(x[0] <= r.hi[0]);
      CHECK(x[1] >= r.lo[1]);
      CHECK(x[1] <= r.hi[1]);
    }
  }
}

TEST_CASE("instance too small") {
  CHECK_THROWS_AS(IntervalDomain(DistributionSpec::uniform(), compute_ell(7, 2.0)),
                  InstanceTooSmall);
  ExperimentConfig cfg;
  cfg.ns = {8};
  CHECK_THROWS_AS(run_trial(cfg, 8, 1), InstanceTooSmall);
}

TEST_CASE("small n collapses to one phase") {
  IntervalDomain domain(DistributionSpec::uniform(), 2);
  auto res = run(config(1024), uniform_points(1024, 1, 1), StrategyKind::adv_sort_1d, domain);
  CHECK(res.trace.k == 1);
  CHECK(res.trace.backyard_begin == 512);
  CHECK(res.trace.backyard_size == 512);
  CHECK(res.array.full());
}

TEST_CASE("n = 2^20 opens five phases") {
  const std::size_t n = std::size_t{1} << 20;
  IntervalDomain domain(DistributionSpec::uniform(), compute_ell(n, 2.0));
  auto res = run(config(n), uniform_points(n, 1, 5), StrategyKind::adv_sort_1d, domain);
  CHECK(res.trace.ell == 10);
  CHECK(res.trace.k == 5);
  CHECK(res.trace.backyard_size == 32768);
  CHECK_FALSE(res.trace.failed);
}

TEST_CASE("run is deterministic") {
  const std::size_t n = std::size_t{1} << 16;
  IntervalDomain domain(DistributionSpec::uniform(), compute_ell(n, 2.0));
  auto pts = uniform_points(n, 1, 77);
  auto a = run(config(n, 1, 20.0), pts, StrategyKind::adv_sort_1d, domain);
  auto b = run(config(n, 1, 20.0), pts, StrategyKind::adv_sort_1d, domain);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(a.array.point(i)[0] == b.array.point(i)[0]);
  CHECK(dump(trace_to_json(a.trace)) == dump(trace_to_json(b.trace)));
}

TEST_CASE("engine invariants over many runs") {
  // A smaller backyard constant exercises several phases at small n.
  std::size_t purity_runs = 0, multi_phase_runs = 0;
  for (std::size_t d : {1u, 2u}) {
    for (int t = 0; t < 40; ++t) {
      const std::size_t n = 20000 + 997 * static_cast<std::size_t>(t);
      const AlgorithmConfig cfg = config(n, d, 2.0);
      const int ell = compute_ell(n, 2.0);
      std::unique_ptr<DomainAdapter> domain;
      if (d == 1) {
        domain = std::make_unique<IntervalDomain>(DistributionSpec::uniform(), ell);
      } else {
        domain = std::make_unique<BlockDomain>(d, ell);
      }
      const StrategyKind kind = d == 1 ? StrategyKind::adv_sort_1d : StrategyKind::grid_tsp_dd;
      Engine engine(cfg, *domain, kind);
      auto pts = uniform_points(n, d, trial_seed(31, t));

      std::vector<double> first_coord(n, -1.0);
      std::size_t modes_seen = 0;
      EngineMode last = engine.mode();
      for (std::size_t i = 0; i < n; ++i) {
        auto rep = engine.place(pts[i]);
        REQUIRE(first_coord[rep.cell] < 0);  // never reused
        first_coord[rep.cell] = pts[i][0];
        if (engine.mode() != last) {
          ++modes_seen;
          CHECK(static_cast<int>(engine.mode()) > static_cast<int>(last));
          last = engine.mode();
        }
      }
      CHECK(modes_seen <= 2);
      // Irrevocability: every cell still holds what was written first.
      for (std::size_t c = 0; c < n; ++c) REQUIRE(engine.array().point(c)[0] == first_coord[c]);

      const auto& phases = engine.phases();
      std::size_t cells = 0;
      for (std::size_t i = 0; i < phases.size(); ++i) {
        const auto& p = phases[i];
        CHECK(p.length == n >> (i + 1));
        CHECK(p.bucket_count == (std::size_t{1} << (ell - static_cast<int>(i))));
        cells += p.length;
        std::size_t bins = 0;
        for (auto b : p.bin_capacities) bins += b;
        if (i == 0) {
          CHECK(bins == p.length);
        } else {
          CHECK(bins == phases[i - 1].length + p.length - p.prev_fill_at_overflow);
          CHECK(p.prev_fill_at_overflow == phases[i - 1].fill_at_overflow.value());
        }
        auto T = p.overflow_time();
        auto Tp = p.full_time();
        if (T && Tp) CHECK(*T <= *Tp);
      }
      const RunTrace trace = engine.trace();
      CHECK(cells + trace.backyard_size == n);

      if (d == 1 && !trace.failed) {
        auto arr = trace.transition_arrivals();
        for (std::size_t i = 1; i < arr.size(); ++i) CHECK(arr[i] > arr[i - 1]);
      }

      // Key purity on clean runs.
      multi_phase_runs += trace.k >= 3 ? 1 : 0;
      if (!trace.failed && trace.all_filled_before_overflow()) {
        ++purity_runs;
        for (const auto& r : engine.layout()) {
          if (r.backyard()) continue;
          for (std::size_t c = r.begin; c < r.begin + r.length; ++c) {
            const auto key = domain->base_key(engine.array().point(c)) >> (r.subarray - 1);
            REQUIRE(key == r.bucket);
          }
        }
      }
    }
  }
  CHECK(purity_runs >= 40);
  CHECK(multi_phase_runs == 80);
}

TEST_CASE("constant input cascades and fails") {
  const std::size_t n = 4096;
  IntervalDomain domain(DistributionSpec::uniform(), compute_ell(n, 2.0));
  PointSet pts = PointSet::from_values(std::vector<double>(n, 0.4));
  auto res = run(config(n, 1, 1.0), pts, StrategyKind::adv_sort_1d, domain);
  CHECK(res.trace.failed);
  CHECK(res.trace.failure_placements > 0);
  CHECK(res.array.full());
  CHECK(tour_cost(res.array) == 0.0);
  CHECK_FALSE(res.trace.all_filled_before_overflow());
}

TEST_CASE("array full rejects further placements") {
  IntervalDomain domain(DistributionSpec::uniform(), 2);
  Engine e(config(1024), domain, StrategyKind::adv_sort_1d);
  auto pts = uniform_points(1024, 1, 3);
  for (std::size_t i = 0; i < 1024; ++i) e.place(pts[i]);
  CHECK_THROWS_AS(e.place(pts[0]), ArrayFull);
}

TEST_CASE("arrival order run") {
  auto pts = uniform_points(1024, 12, 9);
  auto res = run_arrival_order(config(1024, 12), pts);
  CHECK(res.trace.arrival_order_fallback);
  for (std::size_t i = 0; i < 1024; ++i) REQUIRE(res.array.point(i)[3] == pts[i][3]);
  REQUIRE(res.layout.size() == 1);
  CHECK(res.layout[0].length == 1024);
}

TEST_CASE("phase trace records match bin timing") {
  const std::size_t n = std::size_t{1} << 18;
  IntervalDomain domain(DistributionSpec::uniform(), compute_ell(n, 2.0));
  auto res = run(config(n), uniform_points(n, 1, 12), StrategyKind::adv_sort_1d, domain);
  for (const auto& p : res.trace.phases) {
    if (p.overflow_arrival) CHECK(*p.overflow_time == *p.overflow_arrival - p.start_arrival);
    if (p.full_arrival) CHECK(*p.full_time == *p.full_arrival + 1 - p.start_arrival);
  }
}
