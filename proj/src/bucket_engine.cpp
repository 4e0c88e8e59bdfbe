#include "stochsort/bucket_engine.hpp"

#include <algorithm>
#include <cmath>

#include "stochsort/errors.hpp"

namespace stochsort {

std::unique_ptr<InteriorPlacer> DomainAdapter::placer(StrategyKind kind,
                                                     std::size_t capacity, int level,
                                                     std::optional<std::size_t> key) const {
  return make_placer(kind, capacity, key ? region(level, *key) : Box::unit(dim()));
}

IntervalDomain::IntervalDomain(const DistributionSpec& dist, int ell)
    : dist_(dist),
      ell_(ell),
      uniform_(dist.kind == DistributionKind::uniform),
      bounds_(quantile_boundaries(dist, std::size_t{1} << ell)) {}

std::size_t IntervalDomain::base_key(ValuePoint x) const {
  const std::size_t k = bounds_.size() - 1;
  if (uniform_) {
    const double c = std::ceil(x[0] * static_cast<double>(k));
    if (c < 1.0) return 0;
    if (c > static_cast<double>(k)) return k - 1;
    return static_cast<std::size_t>(c) - 1;
  }
  // First boundary b_j >= x gives the interval (b_{j-1}, b_j].
  auto it = std::lower_bound(bounds_.begin() + 1, bounds_.end(), x[0]);
  if (it == bounds_.end()) return k - 1;
  return static_cast<std::size_t>(it - bounds_.begin()) - 1;
}

Box IntervalDomain::region(int level, std::size_t key) const {
  const std::size_t k = bounds_.size() - 1;
  const std::size_t lo = std::min(k, key << level);
  const std::size_t hi = std::min(k, (key + 1) << level);
  return Box{{bounds_[lo]}, {bounds_[hi]}};
}

std::unique_ptr<InteriorPlacer> IntervalDomain::placer(StrategyKind kind,
                                                      std::size_t capacity, int level,
                                                      std::optional<std::size_t> key) const {
  if (uniform_ || kind != StrategyKind::adv_sort_1d) {
    return DomainAdapter::placer(kind, capacity, level, key);
  }
  const double k = static_cast<double>(bounds_.size() - 1);
  double u_lo = 0.0, u_hi = 1.0;
  if (key) {
    u_lo = std::min(1.0, static_cast<double>(*key << level) / k);
    u_hi = std::min(1.0, static_cast<double>((*key + 1) << level) / k);
  }
  const std::size_t g = std::max<std::size_t>(1, ceil_sqrt(capacity));
  std::vector<double> classes(g + 1);
  for (std::size_t c = 0; c <= g; ++c) {
    classes[c] = dist_.apply(u_lo + (u_hi - u_lo) * static_cast<double>(c) / static_cast<double>(g));
  }
  return std::make_unique<AdvSortPlacer>(capacity, std::move(classes));
}

BlockDomain::BlockDomain(std::size_t d, int ell)
    : ell_(ell),
      partition_(BlockPartition::round_robin(d, ell)),
      order_(serpentine_order(partition_.counts())) {}

std::size_t BlockDomain::base_key(ValuePoint x) const {
  return partition_.order_index_of(x) - 1;
}

Box BlockDomain::region(int level, std::size_t key) const {
  const std::size_t first = std::min(order_.size() - 1, key << level);
  const std::size_t last = std::min(order_.size(), (key + 1) << level);
  Box box = partition_.block_box(order_[first]);
  for (std::size_t pos = first + 1; pos < last; ++pos) {
    box = box.hull(partition_.block_box(order_[pos]));
  }
  return box;
}

std::size_t designated_bucket(int phase, ValuePoint x, const DomainAdapter& domain) {
  return (domain.base_key(x) >> (phase - 1)) + 1;
}

std::vector<std::size_t> first_phase_sizes(std::size_t length, std::size_t k) {
  std::vector<std::size_t> sizes(k, length / k);
  for (std::size_t j = 0; j < length % k; ++j) ++sizes[j];
  return sizes;
}

NextPhaseSizes next_phase_sizes(std::span<const std::size_t> capacities,
                                std::span<const std::size_t> fills,
                                std::size_t next_length) {
  if (capacities.size() != fills.size() || capacities.size() % 2 != 0) {
    throw InvalidConfig("previous phase must have an even number of buckets");
  }
  const std::size_t k = capacities.size() / 2;
  std::size_t leftover_total = 0;
  std::vector<std::size_t> leftovers(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    leftovers[j] = (capacities[2 * j] - fills[2 * j]) +
                   (capacities[2 * j + 1] - fills[2 * j + 1]);
    leftover_total += leftovers[j];
  }
  // A_i + A_{i+1} - N_i
  const std::size_t total = leftover_total + next_length;

  NextPhaseSizes out;
  out.bin_capacity = static_cast<double>(total) / static_cast<double>(k);
  out.bin_capacities.assign(k, total / k);
  for (std::size_t j = 0; j < total % k; ++j) ++out.bin_capacities[j];

  out.bucket_sizes.assign(k, 0);
  std::size_t deficit = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (leftovers[j] > out.bin_capacities[j]) {
      deficit += leftovers[j] - out.bin_capacities[j];
      ++out.clamped_bins;
    } else {
      out.bucket_sizes[j] = out.bin_capacities[j] - leftovers[j];
    }
  }
  for (std::size_t j = 0; j < k && deficit > 0; ++j) {
    const std::size_t take = std::min(out.bucket_sizes[j], deficit);
    out.bucket_sizes[j] -= take;
    deficit -= take;
  }
  return out;
}

std::optional<std::size_t> PhaseState::overflow_time() const {
  if (!overflow_arrival) return std::nullopt;
  return *overflow_arrival - start_arrival;
}

std::optional<std::size_t> PhaseState::full_time() const {
  if (!full_arrival) return std::nullopt;
  return *full_arrival + 1 - start_arrival;
}

bool RunTrace::all_filled_before_overflow() const {
  return std::all_of(fill_before_overflow.begin(), fill_before_overflow.end(),
                     [](bool b) { return b; });
}

std::vector<std::size_t> RunTrace::transition_arrivals() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < phases.size(); ++i) {
    out.push_back(phases[i].start_arrival);
  }
  if (final_arrival) out.push_back(*final_arrival);
  return out;
}

Engine::Engine(const AlgorithmConfig& config, const DomainAdapter& domain,
               StrategyKind strategy)
    : config_(config),
      domain_(domain),
      strategy_(strategy),
      array_(config.n, config.d) {
  config_.validate();
  ell_ = compute_ell(config_.n, config_.log_exponent);
  if (domain_.ell() != ell_ || domain_.dim() != config_.d) {
    throw InvalidConfig("domain adapter does not match the configuration");
  }
  threshold_ = config_.backyard_constant * log_power(config_.n, config_.log_exponent);

  const std::size_t length = config_.n / 2;
  const std::size_t k = std::size_t{1} << ell_;
  auto sizes = first_phase_sizes(length, k);
  auto bins = sizes;
  open_phase(std::move(sizes), std::move(bins),
             static_cast<double>(length) / static_cast<double>(k), 0, 0);
}

void Engine::open_phase(std::vector<std::size_t> sizes,
                        std::vector<std::size_t> bins, double bin_capacity,
                        std::size_t clamped, std::size_t prev_fill) {
  PhaseState phase;
  phase.index = static_cast<int>(phases_.size()) + 1;
  phase.bucket_count = sizes.size();
  phase.begin = phases_.empty() ? 0 : phases_.back().begin + phases_.back().length;
  phase.length = config_.n >> phase.index;
  phase.bin_capacity = bin_capacity;
  phase.bin_capacities = std::move(bins);
  phase.prev_fill_at_overflow = prev_fill;
  phase.clamped_bins = clamped;
  phase.start_arrival = arrivals_;

  phase.buckets.resize(sizes.size());
  std::size_t cursor = phase.begin;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    Bucket& b = phase.buckets[j];
    b.begin = cursor;
    b.capacity = sizes[j];
    b.key = j;
    if (b.capacity > 0) {
      b.placer = domain_.placer(strategy_, b.capacity, phase.index - 1, j);
    }
    cursor += sizes[j];
  }

  const std::size_t end = phase.begin + phase.length;
  const double remaining = static_cast<double>(config_.n - end);
  last_phase_open_ = remaining < threshold_ || phase.bucket_count == 1 ||
                     (config_.n >> (phase.index + 1)) == 0;
  backyard_begin_ = end;
  phases_.push_back(std::move(phase));
  if (last_phase_open_ && config_.n > end) {
    backyard_ = domain_.placer(strategy_, config_.n - end, 0, std::nullopt);
  }
}

void Engine::spawn_next_phase() {
  const PhaseState& cur = phases_.back();
  std::vector<std::size_t> caps(cur.bucket_count);
  std::vector<std::size_t> fills(cur.bucket_count);
  for (std::size_t j = 0; j < cur.bucket_count; ++j) {
    caps[j] = cur.buckets[j].capacity;
    fills[j] = cur.buckets[j].fill;
  }
  const std::size_t next_length = config_.n >> (cur.index + 1);
  auto sizes = next_phase_sizes(caps, fills, next_length);
  open_phase(std::move(sizes.bucket_sizes), std::move(sizes.bin_capacities),
             sizes.bin_capacity, sizes.clamped_bins, cur.filled);
}

void Engine::enter_final_phase() {
  mode_ = EngineMode::final;
  final_arrival_ = arrivals_;
}

std::size_t Engine::write_bucket(PhaseState& phase, Bucket& bucket, ValuePoint x) {
  const std::size_t cell = bucket.begin + bucket.placer->place(x);
  array_.write(cell, x);
  ++bucket.fill;
  if (++phase.filled == phase.length) phase.full_arrival = arrivals_;
  return cell;
}

bool Engine::try_designated(std::size_t key, ValuePoint x, PlacementReport& report) {
  while (first_open_phase_ < phases_.size() &&
         phases_[first_open_phase_].filled == phases_[first_open_phase_].length) {
    ++first_open_phase_;
  }
  for (std::size_t q = first_open_phase_; q < phases_.size(); ++q) {
    PhaseState& phase = phases_[q];
    if (phase.filled == phase.length) continue;
    Bucket& bucket = phase.buckets[key >> q];
    if (bucket.room() == 0) continue;
    report.cell = write_bucket(phase, bucket, x);
    report.phase = phase.index;
    return true;
  }
  return false;
}

PlacementReport Engine::place(ValuePoint x) {
  if (array_.full()) throw ArrayFull("all " + std::to_string(array_.size()) + " cells used");
  PlacementReport report;

  if (mode_ != EngineMode::failed) {
    const std::size_t key = domain_.base_key(x);
    if (try_designated(key, x, report)) {
      ++arrivals_;
      return report;
    }
    // First overflow of the current instance.
    while (mode_ == EngineMode::phase) {
      PhaseState& cur = phases_.back();
      cur.overflow_arrival = arrivals_;
      cur.fill_at_overflow = cur.filled;
      if (last_phase_open_) {
        enter_final_phase();
        report.transition = 0;
        break;
      }
      spawn_next_phase();
      PhaseState& next = phases_.back();
      report.transition = next.index;
      Bucket& bucket = next.buckets[key >> (next.index - 1)];
      if (bucket.room() > 0) {
        report.cell = write_bucket(next, bucket, x);
        report.phase = next.index;
        ++arrivals_;
        return report;
      }
    }
    if (backyard_ && !backyard_->full()) {
      report.cell = backyard_begin_ + backyard_->place(x);
      array_.write(report.cell, x);
      report.phase = 0;
      ++arrivals_;
      return report;
    }
    mode_ = EngineMode::failed;
    failure_arrival_ = arrivals_;
  }

  next_free_ = array_.next_empty(next_free_);
  report.cell = next_free_;
  array_.write(report.cell, x);
  report.phase = -1;
  ++failure_placements_;
  ++arrivals_;
  return report;
}

RunTrace Engine::trace() const {
  RunTrace t;
  t.ell = ell_;
  t.k = static_cast<int>(phases_.size());
  t.strategy = strategy_;
  for (const auto& p : phases_) {
    PhaseRecord r;
    r.index = p.index;
    r.bucket_count = p.bucket_count;
    r.begin = p.begin;
    r.length = p.length;
    r.bin_capacity = p.bin_capacity;
    r.prev_fill_at_overflow = p.prev_fill_at_overflow;
    r.clamped_bins = p.clamped_bins;
    r.start_arrival = p.start_arrival;
    r.overflow_time = p.overflow_time();
    r.full_time = p.full_time();
    r.overflow_arrival = p.overflow_arrival;
    r.full_arrival = p.full_arrival;
    r.fill_at_overflow = p.fill_at_overflow;
    t.phases.push_back(r);
  }
  for (std::size_t j = 0; j + 1 < phases_.size(); ++j) {
    const auto& filled = phases_[j].full_arrival;
    const auto& overflow = phases_[j + 1].overflow_arrival;
    t.fill_before_overflow.push_back(filled && (!overflow || *filled < *overflow));
  }
  t.final_arrival = final_arrival_;
  t.failed = mode_ == EngineMode::failed;
  t.failure_arrival = failure_arrival_;
  t.backyard_begin = backyard_begin_;
  t.backyard_size = config_.n - backyard_begin_;
  t.backyard_fill = backyard_ ? backyard_->fill() : 0;
  t.failure_placements = failure_placements_;
  return t;
}

std::vector<Region> Engine::layout() const {
  std::vector<Region> out;
  for (const auto& p : phases_) {
    for (const auto& b : p.buckets) {
      if (b.capacity > 0) out.push_back({b.begin, b.capacity, p.index, b.key});
    }
  }
  if (config_.n > backyard_begin_) {
    out.push_back({backyard_begin_, config_.n - backyard_begin_, 0, 0});
  }
  return out;
}

RunResult run(const AlgorithmConfig& config, const PointSet& input,
              StrategyKind strategy, const DomainAdapter& domain) {
  if (input.size() != config.n || input.dim() != config.d) {
    throw InvalidConfig("input size or dimension does not match the configuration");
  }
  Engine engine(config, domain, strategy);
  for (std::size_t t = 0; t < input.size(); ++t) engine.place(input[t]);
  RunTrace trace = engine.trace();
  auto layout = engine.layout();
  return RunResult{engine.take_array(), std::move(trace), std::move(layout)};
}

RunResult run_arrival_order(const AlgorithmConfig& config, const PointSet& input) {
  config.validate();
  if (input.size() != config.n || input.dim() != config.d) {
    throw InvalidConfig("input size or dimension does not match the configuration");
  }
  RunResult result{PlacementArray(config.n, config.d), {}, {}};
  result.trace.ell = compute_ell(config.n, config.log_exponent);
  result.trace.arrival_order_fallback = true;
  result.trace.strategy = StrategyKind::arrival_order;
  ArrivalOrderPlacer placer(config.n);
  for (std::size_t t = 0; t < input.size(); ++t) {
    result.array.write(placer.place(input[t]), input[t]);
  }
  result.layout.push_back({0, config.n, 1, 0});
  return result;
}

}  // namespace stochsort
