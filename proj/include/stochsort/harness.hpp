#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochsort/bucket_engine.hpp"
#include "stochsort/core_model.hpp"
#include "stochsort/oracles.hpp"
#include "stochsort/rng.hpp"

namespace stochsort {

enum class Mode { sort1d, tsp, verify_bins, verify_fill, sweep };

std::string_view to_string(Mode mode);

struct ExperimentConfig {
  Mode mode = Mode::sort1d;
  std::vector<std::size_t> ns;
  std::size_t d = 1;
  double p = 2.0;
  double backyard_constant = 100.0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  DistributionSpec distribution = DistributionSpec::uniform();
  unsigned threads = 0;  // 0: one per hardware thread

  /// Throws InvalidConfig. Non-uniform inputs are only supported for d = 1.
  void validate() const;
  AlgorithmConfig algorithm(std::size_t n, std::uint64_t seed) const;
};

/// Total cost split by the kind of region pair each consecutive-cell edge
/// joins.
struct CostBreakdown {
  double within_buckets = 0.0;
  double between_buckets = 0.0;
  double between_subarrays = 0.0;
  double backyard = 0.0;

  double total() const {
    return within_buckets + between_buckets + between_subarrays + backyard;
  }
};

/// Requires a full array whose regions tile it in order.
CostBreakdown decompose_cost(const PlacementArray& array, const std::vector<Region>& layout);

struct TrialResult {
  std::size_t n = 0;
  std::size_t d = 1;
  double p = 2.0;
  double backyard_constant = 100.0;
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  double cost = 0.0;
  OracleEstimate opt;
  double ratio = 0.0;
  bool failed = false;
  RunTrace trace;
  CostBreakdown breakdown;
};

/// n i.i.d. points of [0,1]^d drawn coordinate by coordinate.
PointSet sample_points(std::size_t n, std::size_t d, const DistributionSpec& dist,
                       std::uint64_t seed);

/// One seeded run: sample, place (arrival order when d >= 2 and d >= l),
/// measure cost against the exact (d = 1) or heuristic (d >= 2) optimum.
/// Throws InstanceTooSmall when l does not exist for n.
TrialResult run_trial(const ExperimentConfig& cfg, std::size_t n, std::uint64_t trial_seed);

/// Same, on caller-supplied points.
TrialResult run_trial_on(const ExperimentConfig& cfg, const PointSet& points,
                         std::uint64_t trial_seed);

// Balls into bins -----------------------------------------------------------

struct BinSimConfig {
  std::vector<std::size_t> capacities;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t n_context = 0;  // n whose log2 scales the slack

  /// K bins of capacity C each.
  static BinSimConfig equal(std::size_t k, std::size_t c, std::size_t trials,
                            std::uint64_t seed, std::size_t n_context);
  std::size_t total() const;  // M
};

/// Loads of one throwing sequence.
class BinState {
 public:
  explicit BinState(std::vector<std::size_t> capacities);

  /// Throws one ball into `bin`; a ball landing in a full bin is discarded.
  void throw_into(std::size_t bin);

  std::size_t thrown() const { return thrown_; }
  std::span<const std::size_t> loads() const { return loads_; }
  /// Balls thrown before the first ball that hit a full bin.
  std::optional<std::size_t> first_overflow() const { return first_overflow_; }
  /// Balls thrown until every bin was full.
  std::optional<std::size_t> all_full() const { return all_full_; }

 private:
  std::vector<std::size_t> capacities_;
  std::vector<std::size_t> loads_;
  std::size_t thrown_ = 0;
  std::size_t open_bins_ = 0;
  std::optional<std::size_t> first_overflow_;
  std::optional<std::size_t> all_full_;
};

struct BinTrial {
  std::size_t first_overflow = 0;  // T
  std::size_t all_full = 0;        // T'
};

/// Throws uniform balls until every bin is full.
BinTrial simulate_bins(std::span<const std::size_t> capacities, SplitMix64& rng);

struct Quantiles {
  double min = 0, p05 = 0, median = 0, p95 = 0, max = 0, mean = 0;
};
Quantiles quantiles(std::vector<double> values);

inline constexpr std::array<double, 3> kSlackMultipliers{1.0, 2.0, 4.0};

struct Lemma1Report {
  std::size_t bins = 0;
  std::size_t total = 0;  // M
  std::size_t n_context = 0;
  std::size_t trials = 0;
  std::array<double, 3> early_overflow_ok{};  // fraction with T >= M - a M / sqrt(log2 n)
  std::array<double, 3> late_fill_ok{};       // fraction with T' <= M + a M / sqrt(log2 n)
  Quantiles first_overflow;
  Quantiles all_full;
  std::vector<BinTrial> runs;
  /// Both fractions at a = 4 are at least 0.95.
  bool pass = false;
};

Lemma1Report verify_lemma1(const BinSimConfig& cfg);

// Fill before overflow ------------------------------------------------------

struct FillReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  int k = 0;
  bool vacuous = false;  // no phase boundary exists at this n
  std::vector<double> boundary_success;  // fraction per boundary j = 1..k-1
  double overall_success = 0.0;
  double failure_rate = 0.0;
  std::vector<TrialResult> results;
};

/// Uses the first n of cfg.ns.
FillReport verify_fill_before_overflow(const ExperimentConfig& cfg);

// Experiments ---------------------------------------------------------------

struct GroupSummary {
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
  double p95_ratio = 0.0;
  double mean_cost = 0.0;
  double mean_opt = 0.0;
  double failure_rate = 0.0;
  double mean_k = 0.0;
  bool arrival_order_fallback = false;
  OracleKind opt_kind = OracleKind::exact;
  CostBreakdown mean_breakdown;
  double normalized_ratio = 0.0;  // mean_ratio / log2(n)^2
};

struct SweepFit {
  double slope = 0.0;      // least squares of mean ratio on log2(n)^2 through 0
  double max_drift = 0.0;  // max over i < j of normalized_j / normalized_i
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GroupSummary> groups;
  std::vector<std::size_t> skipped;  // n without a valid l
  std::vector<TrialResult> trials;   // ordered by (n, trial index)
  std::optional<SweepFit> fit;       // when at least two groups ran
};

/// Runs cfg.trials seeded trials for every n (trial seed = seed xor index),
/// in parallel, and folds the results in trial-index order.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

GroupSummary summarize(std::size_t n, const std::vector<TrialResult>& trials);
SweepFit fit_sweep(const std::vector<GroupSummary>& groups);

}  // namespace stochsort
