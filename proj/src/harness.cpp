#include "stochsort/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "stochsort/errors.hpp"

namespace stochsort {

namespace {

/// Runs f(0..count-1) on up to `threads` workers; rethrows the first error.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double log2_squared(std::size_t n) {
  const double l = std::log2(static_cast<double>(n));
  return l * l;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::sort1d: return "sort1d";
    case Mode::tsp: return "tsp";
    case Mode::verify_bins: return "verify-bins";
    case Mode::verify_fill: return "verify-fill";
    case Mode::sweep: return "sweep";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (ns.empty()) throw InvalidConfig("no instance size given");
  if (trials == 0) throw InvalidConfig("trial count must be positive");
  if (d == 0) throw InvalidConfig("dimension must be >= 1");
  if (d > 1 && distribution.kind != DistributionKind::uniform) {
    throw InvalidConfig("non-uniform inputs are supported for d = 1 only");
  }
  if (!(p >= 1.0 && p <= 3.0)) throw InvalidConfig("log exponent must lie in [1, 3]");
  if (!(backyard_constant > 0.0)) throw InvalidConfig("backyard constant must be positive");
  distribution.validate();
}

AlgorithmConfig ExperimentConfig::algorithm(std::size_t n, std::uint64_t s) const {
  AlgorithmConfig a;
  a.n = n;
  a.d = d;
  a.log_exponent = p;
  a.backyard_constant = backyard_constant;
  a.seed = s;
  a.distribution = distribution;
  return a;
}

CostBreakdown decompose_cost(const PlacementArray& array, const std::vector<Region>& layout) {
  if (!array.full()) throw IncompleteArray("cannot decompose a partial array");
  CostBreakdown out;
  std::size_t expected = 0;
  for (std::size_t r = 0; r < layout.size(); ++r) {
    const Region& reg = layout[r];
    if (reg.begin != expected) throw InvalidConfig("layout does not tile the array");
    double inside = 0.0;
    for (std::size_t c = reg.begin + 1; c < reg.begin + reg.length; ++c) {
      inside += distance(array.point(c - 1), array.point(c));
    }
    (reg.backyard() ? out.backyard : out.within_buckets) += inside;
    expected = reg.begin + reg.length;
    if (r + 1 < layout.size()) {
      const Region& next = layout[r + 1];
      const double edge = distance(array.point(expected - 1), array.point(next.begin));
      if (!reg.backyard() && next.subarray == reg.subarray) {
        out.between_buckets += edge;
      } else {
        out.between_subarrays += edge;
      }
    }
  }
  if (expected != array.size()) throw InvalidConfig("layout does not tile the array");
  return out;
}

PointSet sample_points(std::size_t n, std::size_t d, const DistributionSpec& dist,
                       std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> coords(n * d);
  for (auto& c : coords) c = dist.apply(rng.uniform());
  return PointSet(d, std::move(coords));
}

TrialResult run_trial_on(const ExperimentConfig& cfg, const PointSet& points,
                         std::uint64_t trial_seed) {
  const std::size_t n = points.size();
  const AlgorithmConfig algo = cfg.algorithm(n, trial_seed);
  const int ell = compute_ell(n, cfg.p);

  RunResult run_result = [&] {
    if (cfg.d == 1) {
      IntervalDomain domain(cfg.distribution, ell);
      return run(algo, points, StrategyKind::adv_sort_1d, domain);
    }
    if (cfg.d >= static_cast<std::size_t>(ell)) return run_arrival_order(algo, points);
    BlockDomain domain(cfg.d, ell);
    return run(algo, points, StrategyKind::grid_tsp_dd, domain);
  }();

  TrialResult r;
  r.n = n;
  r.d = cfg.d;
  r.p = cfg.p;
  r.backyard_constant = cfg.backyard_constant;
  r.seed = trial_seed;
  r.cost = tour_cost(run_result.array);
  if (cfg.d == 1) {
    r.opt = {opt_sort_cost(points.coords()), OracleKind::exact, n, 1, true};
  } else {
    r.opt = tsp_path_heuristic(points);
  }
  if (r.opt.value > 0.0) {
    r.ratio = r.cost / r.opt.value;
  } else {
    r.ratio = r.cost > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  r.failed = run_result.trace.failed;
  r.breakdown = decompose_cost(run_result.array, run_result.layout);
  r.trace = std::move(run_result.trace);
  return r;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t n, std::uint64_t trial_seed) {
  compute_ell(n, cfg.p);
  return run_trial_on(cfg, sample_points(n, cfg.d, cfg.distribution, trial_seed), trial_seed);
}

BinSimConfig BinSimConfig::equal(std::size_t k, std::size_t c, std::size_t trials,
                                 std::uint64_t seed, std::size_t n_context) {
  BinSimConfig cfg;
  cfg.capacities.assign(k, c);
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.n_context = n_context;
  return cfg;
}

std::size_t BinSimConfig::total() const {
  std::size_t m = 0;
  for (auto c : capacities) m += c;
  return m;
}

BinState::BinState(std::vector<std::size_t> capacities)
    : capacities_(std::move(capacities)), loads_(capacities_.size(), 0) {
  for (auto c : capacities_) open_bins_ += c > 0 ? 1 : 0;
  if (open_bins_ == 0) all_full_ = 0;
}

void BinState::throw_into(std::size_t bin) {
  ++thrown_;
  if (loads_[bin] == capacities_[bin]) {
    if (!first_overflow_) first_overflow_ = thrown_ - 1;
    return;
  }
  if (++loads_[bin] == capacities_[bin] && --open_bins_ == 0) all_full_ = thrown_;
}

BinTrial simulate_bins(std::span<const std::size_t> capacities, SplitMix64& rng) {
  if (capacities.empty()) throw InvalidConfig("no bins");
  BinState state({capacities.begin(), capacities.end()});
  while (!state.all_full()) state.throw_into(rng.below(capacities.size()));
  const std::size_t full = *state.all_full();
  return {state.first_overflow().value_or(full), full};
}

Quantiles quantiles(std::vector<double> values) {
  Quantiles q;
  if (values.empty()) return q;
  double sum = 0.0;
  for (double v : values) sum += v;
  q.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  auto rank = [&](double f) {
    auto idx = static_cast<std::size_t>(std::ceil(f * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(idx, 1, values.size()) - 1];
  };
  q.min = values.front();
  q.max = values.back();
  q.p05 = rank(0.05);
  q.median = rank(0.5);
  q.p95 = rank(0.95);
  return q;
}

Lemma1Report verify_lemma1(const BinSimConfig& cfg) {
  if (cfg.trials == 0) throw InvalidConfig("trial count must be positive");
  if (cfg.n_context < 2) throw InvalidConfig("n context must be at least 2");
  Lemma1Report rep;
  rep.bins = cfg.capacities.size();
  rep.total = cfg.total();
  rep.n_context = cfg.n_context;
  rep.trials = cfg.trials;
  rep.runs.resize(cfg.trials);
  for (std::size_t r = 0; r < cfg.trials; ++r) {
    SplitMix64 rng(trial_seed(cfg.seed, r));
    rep.runs[r] = simulate_bins(cfg.capacities, rng);
  }
  const double m = static_cast<double>(rep.total);
  const double scale = m / std::sqrt(std::log2(static_cast<double>(cfg.n_context)));
  std::vector<double> early, late;
  for (const auto& run : rep.runs) {
    early.push_back(static_cast<double>(run.first_overflow));
    late.push_back(static_cast<double>(run.all_full));
  }
  for (std::size_t a = 0; a < kSlackMultipliers.size(); ++a) {
    const double slack = kSlackMultipliers[a] * scale;
    std::size_t ok_early = 0, ok_late = 0;
    for (const auto& run : rep.runs) {
      ok_early += static_cast<double>(run.first_overflow) >= m - slack ? 1 : 0;
      ok_late += static_cast<double>(run.all_full) <= m + slack ? 1 : 0;
    }
    rep.early_overflow_ok[a] = static_cast<double>(ok_early) / cfg.trials;
    rep.late_fill_ok[a] = static_cast<double>(ok_late) / cfg.trials;
  }
  rep.first_overflow = quantiles(std::move(early));
  rep.all_full = quantiles(std::move(late));
  rep.pass = rep.early_overflow_ok[2] >= 0.95 && rep.late_fill_ok[2] >= 0.95;
  return rep;
}

FillReport verify_fill_before_overflow(const ExperimentConfig& cfg) {
  cfg.validate();
  FillReport rep;
  rep.n = cfg.ns.front();
  rep.trials = cfg.trials;
  rep.results.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    rep.results[t] = run_trial(cfg, rep.n, trial_seed(cfg.seed, t));
    rep.results[t].trial = t;
  });

  std::size_t boundaries = 0;
  for (const auto& r : rep.results) {
    rep.k = std::max(rep.k, r.trace.k);
    boundaries = std::max(boundaries, r.trace.fill_before_overflow.size());
  }
  rep.vacuous = boundaries == 0;
  std::vector<std::size_t> ok(boundaries, 0), seen(boundaries, 0);
  std::size_t all_ok = 0, failures = 0;
  for (const auto& r : rep.results) {
    const auto& flags = r.trace.fill_before_overflow;
    for (std::size_t j = 0; j < flags.size(); ++j) {
      ++seen[j];
      ok[j] += flags[j] ? 1 : 0;
    }
    all_ok += r.trace.all_filled_before_overflow() ? 1 : 0;
    failures += r.failed ? 1 : 0;
  }
  for (std::size_t j = 0; j < boundaries; ++j) {
    rep.boundary_success.push_back(seen[j] ? static_cast<double>(ok[j]) / seen[j] : 1.0);
  }
  rep.overall_success = static_cast<double>(all_ok) / cfg.trials;
  rep.failure_rate = static_cast<double>(failures) / cfg.trials;
  return rep;
}

GroupSummary summarize(std::size_t n, const std::vector<TrialResult>& trials) {
  GroupSummary g;
  g.n = n;
  g.trials = trials.size();
  if (trials.empty()) return g;
  std::vector<double> ratios;
  double failures = 0.0, k_sum = 0.0;
  for (const auto& t : trials) {
    ratios.push_back(t.ratio);
    g.mean_cost += t.cost;
    g.mean_opt += t.opt.value;
    failures += t.failed ? 1.0 : 0.0;
    k_sum += t.trace.k;
    g.mean_breakdown.within_buckets += t.breakdown.within_buckets;
    g.mean_breakdown.between_buckets += t.breakdown.between_buckets;
    g.mean_breakdown.between_subarrays += t.breakdown.between_subarrays;
    g.mean_breakdown.backyard += t.breakdown.backyard;
  }
  const double m = static_cast<double>(trials.size());
  auto q = quantiles(ratios);
  g.mean_ratio = q.mean;
  g.median_ratio = q.median;
  g.p95_ratio = q.p95;
  g.mean_cost /= m;
  g.mean_opt /= m;
  g.failure_rate = failures / m;
  g.mean_k = k_sum / m;
  g.mean_breakdown.within_buckets /= m;
  g.mean_breakdown.between_buckets /= m;
  g.mean_breakdown.between_subarrays /= m;
  g.mean_breakdown.backyard /= m;
  g.arrival_order_fallback = trials.front().trace.arrival_order_fallback;
  g.opt_kind = trials.front().opt.kind;
  g.normalized_ratio = g.mean_ratio / log2_squared(n);
  return g;
}

SweepFit fit_sweep(const std::vector<GroupSummary>& groups) {
  SweepFit fit;
  double num = 0.0, den = 0.0;
  for (const auto& g : groups) {
    const double l2 = log2_squared(g.n);
    num += g.mean_ratio * l2;
    den += l2 * l2;
  }
  fit.slope = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (groups[i].normalized_ratio > 0.0) {
        fit.max_drift = std::max(fit.max_drift,
                                 groups[j].normalized_ratio / groups[i].normalized_ratio);
      }
    }
  }
  return fit;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  rep.config = cfg;
  std::vector<std::size_t> valid;
  for (auto n : cfg.ns) {
    try {
      compute_ell(n, cfg.p);
      valid.push_back(n);
    } catch (const InstanceTooSmall&) {
      rep.skipped.push_back(n);
    }
  }
  rep.trials.resize(valid.size() * cfg.trials);
  parallel_for(rep.trials.size(), cfg.threads, [&](std::size_t task) {
    const std::size_t n = valid[task / cfg.trials];
    const std::size_t t = task % cfg.trials;
    rep.trials[task] = run_trial(cfg, n, trial_seed(cfg.seed, t));
    rep.trials[task].trial = t;
  });
  for (std::size_t g = 0; g < valid.size(); ++g) {
    std::vector<TrialResult> group(rep.trials.begin() + g * cfg.trials,
                                   rep.trials.begin() + (g + 1) * cfg.trials);
    rep.groups.push_back(summarize(valid[g], group));
  }
  if (rep.groups.size() >= 2) rep.fit = fit_sweep(rep.groups);
  return rep;
}

}  // namespace stochsort
