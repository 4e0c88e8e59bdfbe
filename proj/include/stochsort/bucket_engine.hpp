#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stochsort/core_model.hpp"
#include "stochsort/geometry.hpp"
#include "stochsort/interior_placement.hpp"

namespace stochsort {

/// Maps points to the 2^l phase-1 keys of equal probability mass and gives
/// the region covered by a merged key. Phase i uses key >> (i-1).
class DomainAdapter {
 public:
  virtual ~DomainAdapter() = default;
  virtual std::size_t dim() const = 0;
  virtual int ell() const = 0;
  /// 0-based phase-1 key in [0, 2^l).
  virtual std::size_t base_key(ValuePoint x) const = 0;
  /// Region of merged key `key` at `level` (phase - 1).
  virtual Box region(int level, std::size_t key) const = 0;
  /// Interior placer for merged key `key` at `level`, or for the whole
  /// domain (the backyard) when `key` is empty. Defaults to make_placer on
  /// the region.
  virtual std::unique_ptr<InteriorPlacer> placer(StrategyKind kind, std::size_t capacity,
                                                 int level,
                                                 std::optional<std::size_t> key) const;
};

/// One-dimensional keys: equal-mass intervals ((j-1)/K, j/K] under the
/// distribution's quantile function, with 0 mapped to the first interval.
class IntervalDomain final : public DomainAdapter {
 public:
  IntervalDomain(const DistributionSpec& dist, int ell);

  std::size_t dim() const override { return 1; }
  int ell() const override { return ell_; }
  std::size_t base_key(ValuePoint x) const override;
  Box region(int level, std::size_t key) const override;
  /// Non-uniform inputs get equal-mass value classes inside each bucket.
  std::unique_ptr<InteriorPlacer> placer(StrategyKind kind, std::size_t capacity, int level,
                                         std::optional<std::size_t> key) const override;

  std::span<const double> boundaries() const { return bounds_; }

 private:
  DistributionSpec dist_;
  int ell_;
  bool uniform_;
  std::vector<double> bounds_;
};

/// d-dimensional keys: serpentine position of the point's block in the
/// round-robin partition with l splits.
class BlockDomain final : public DomainAdapter {
 public:
  BlockDomain(std::size_t d, int ell);

  std::size_t dim() const override { return partition_.dim(); }
  int ell() const override { return ell_; }
  std::size_t base_key(ValuePoint x) const override;
  Box region(int level, std::size_t key) const override;

  const BlockPartition& partition() const { return partition_; }
  const std::vector<GridCoord>& order() const { return order_; }

 private:
  int ell_;
  BlockPartition partition_;
  std::vector<GridCoord> order_;
};

/// 1-based bucket of x at phase `phase`.
std::size_t designated_bucket(int phase, ValuePoint x, const DomainAdapter& domain);

struct Bucket {
  std::size_t begin = 0;
  std::size_t capacity = 0;
  std::size_t fill = 0;
  std::size_t key = 0;  // 0-based, at its phase's merge level
  std::unique_ptr<InteriorPlacer> placer;

  std::size_t room() const { return capacity - fill; }
};

/// Bin capacities and A_{i+1} bucket sizes for the next balls-into-bins
/// instance, computed from the capacities and fills of A_i's buckets.
struct NextPhaseSizes {
  double bin_capacity = 0.0;                // C_{i+1}, unrounded
  std::vector<std::size_t> bin_capacities;  // floor(C) or floor(C)+1
  std::vector<std::size_t> bucket_sizes;    // cells of A_{i+1} per bucket
  std::size_t clamped_bins = 0;             // bins whose leftovers exceeded the bin
};

/// Bins are ⌊C⌋ with the remainder handed one each to the lowest-indexed
/// bins. A bin whose leftovers exceed its capacity gets a zero-size bucket
/// and the deficit is taken from the lowest-indexed buckets with room, so the
/// sizes always sum to `next_length`.
NextPhaseSizes next_phase_sizes(std::span<const std::size_t> capacities,
                                std::span<const std::size_t> fills,
                                std::size_t next_length);

/// Capacities of the K buckets of phase 1: ⌊A/K⌋, remainder to the lowest.
std::vector<std::size_t> first_phase_sizes(std::size_t length, std::size_t k);

struct PhaseState {
  int index = 1;  // i
  std::size_t bucket_count = 0;  // K_i
  std::size_t begin = 0;         // first cell of A_i
  std::size_t length = 0;        // |A_i| = ⌊n / 2^i⌋
  double bin_capacity = 0.0;     // C_i
  std::vector<std::size_t> bin_capacities;
  std::vector<Bucket> buckets;
  std::size_t filled = 0;
  std::size_t prev_fill_at_overflow = 0;  // N_{i-1}
  std::size_t clamped_bins = 0;
  std::size_t start_arrival = 0;  // 0-based arrival that opened the phase
  std::optional<std::size_t> overflow_arrival;
  std::optional<std::size_t> full_arrival;
  std::optional<std::size_t> fill_at_overflow;  // N_i

  /// T_i: arrivals of this phase before its first overflow.
  std::optional<std::size_t> overflow_time() const;
  /// T_i': arrivals from the start of this phase until A_i was full.
  std::optional<std::size_t> full_time() const;
};

struct PhaseRecord {
  int index = 0;
  std::size_t bucket_count = 0;
  std::size_t begin = 0;
  std::size_t length = 0;
  double bin_capacity = 0.0;
  std::size_t prev_fill_at_overflow = 0;
  std::size_t clamped_bins = 0;
  std::size_t start_arrival = 0;
  std::optional<std::size_t> overflow_time;
  std::optional<std::size_t> full_time;
  std::optional<std::size_t> overflow_arrival;
  std::optional<std::size_t> full_arrival;
  std::optional<std::size_t> fill_at_overflow;
};

struct RunTrace {
  int ell = 0;
  int k = 0;  // phases opened
  bool arrival_order_fallback = false;
  StrategyKind strategy = StrategyKind::adv_sort_1d;
  std::vector<PhaseRecord> phases;
  std::optional<std::size_t> final_arrival;  // arrival that entered final mode
  /// Entry j-1: A_j filled before A_{j+1} first overflowed, j = 1..k-1.
  std::vector<bool> fill_before_overflow;
  bool failed = false;
  std::optional<std::size_t> failure_arrival;
  std::size_t backyard_begin = 0;
  std::size_t backyard_size = 0;
  std::size_t backyard_fill = 0;
  std::size_t failure_placements = 0;

  bool all_filled_before_overflow() const;
  /// Arrival indices of every phase transition, final mode included.
  std::vector<std::size_t> transition_arrivals() const;
};

/// A contiguous stretch of cells owned by one bucket, or the backyard.
struct Region {
  std::size_t begin = 0;
  std::size_t length = 0;
  int subarray = 0;     // phase index, or 0 for the backyard
  std::size_t bucket = 0;
  bool backyard() const { return subarray == 0; }
};

enum class EngineMode { phase, final, failed };

struct PlacementReport {
  std::size_t cell = 0;
  int phase = 0;  // phase whose bucket took the point; 0 for backyard, -1 for failure
  std::optional<int> transition;  // phase opened by this arrival; 0 = final mode
};

/// The phase machine for one run. Not thread-safe; one engine per run.
class Engine {
 public:
  /// Opens phase 1. Throws InstanceTooSmall when l does not exist.
  Engine(const AlgorithmConfig& config, const DomainAdapter& domain,
         StrategyKind strategy);

  PlacementReport place(ValuePoint x);

  EngineMode mode() const { return mode_; }
  const PlacementArray& array() const { return array_; }
  const std::vector<PhaseState>& phases() const { return phases_; }
  std::size_t arrivals() const { return arrivals_; }
  /// Cell count below which the remainder becomes the backyard.
  double backyard_threshold() const { return threshold_; }

  RunTrace trace() const;
  std::vector<Region> layout() const;

  /// Returns the array, leaving the engine unusable.
  PlacementArray take_array() { return std::move(array_); }

 private:
  void open_phase(std::vector<std::size_t> sizes, std::vector<std::size_t> bins,
                  double bin_capacity, std::size_t clamped,
                  std::size_t prev_fill);
  void spawn_next_phase();
  void enter_final_phase();
  bool try_designated(std::size_t key, ValuePoint x, PlacementReport& report);
  std::size_t write_bucket(PhaseState& phase, Bucket& bucket, ValuePoint x);

  AlgorithmConfig config_;
  const DomainAdapter& domain_;
  StrategyKind strategy_;
  PlacementArray array_;
  int ell_ = 0;
  double threshold_ = 0.0;
  bool last_phase_open_ = false;
  std::vector<PhaseState> phases_;
  std::size_t first_open_phase_ = 0;
  EngineMode mode_ = EngineMode::phase;
  std::size_t backyard_begin_ = 0;
  std::unique_ptr<InteriorPlacer> backyard_;
  std::size_t next_free_ = 0;
  std::size_t arrivals_ = 0;
  std::optional<std::size_t> final_arrival_;
  std::optional<std::size_t> failure_arrival_;
  std::size_t failure_placements_ = 0;
};

struct RunResult {
  PlacementArray array;
  RunTrace trace;
  std::vector<Region> layout;
};

/// Feeds the points through the engine in arrival order.
RunResult run(const AlgorithmConfig& config, const PointSet& input,
              StrategyKind strategy, const DomainAdapter& domain);

/// Whole array as one bucket filled in arrival order (the d >= l mode).
RunResult run_arrival_order(const AlgorithmConfig& config, const PointSet& input);

}  // namespace stochsort
