#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "stochsort/errors.hpp"
#include "stochsort/harness.hpp"
#include "stochsort/report.hpp"
#include "stochsort/rng.hpp"

using namespace stochsort;

namespace {

ExperimentConfig small_config(std::size_t n, std::size_t d = 1) {
  ExperimentConfig c;
  c.mode = d == 1 ? Mode::sort1d : Mode::tsp;
  c.ns = {n};
  c.d = d;
  c.backyard_constant = 5.0;
  c.trials = 4;
  c.seed = 42;
  c.threads = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("decomposition sums to the tour cost") {
  for (std::size_t d : {1u, 2u}) {
    for (double c : {1.0, 5.0, 100.0}) {
      auto cfg = small_config(30000, d);
      cfg.backyard_constant = c;
      for (std::uint64_t s = 0; s < 3; ++s) {
        auto r = run_trial(cfg, 30000, s);
        CHECK(std::abs(r.breakdown.total() - r.cost) <= 1e-9 * r.cost);
        CHECK(r.breakdown.between_buckets >= 0.0);
        // Consecutive 1-D buckets hold adjacent value intervals.
        if (d == 1 && !r.failed) CHECK(r.breakdown.between_buckets <= 2.0 * r.trace.k);
      }
    }
  }
}

TEST_CASE("decomposition by hand") {
  PlacementArray a(4, 1);
  const double v[] = {0.1, 0.2, 0.6, 0.7};
  for (int i = 0; i < 4; ++i) a.write(i, ValuePoint(&v[i], 1));
  std::vector<Region> layout{{0, 1, 1, 0}, {1, 1, 1, 1}, {2, 1, 2, 0}, {3, 1, 0, 0}};
  auto b = decompose_cost(a, layout);
  CHECK(b.between_buckets == doctest::Approx(0.1));
  CHECK(b.between_subarrays == doctest::Approx(0.5));
  CHECK(b.within_buckets == 0.0);
  CHECK(b.backyard == 0.0);
  std::vector<Region> gap{{0, 1, 1, 0}, {2, 2, 0, 0}};
  CHECK_THROWS_AS(decompose_cost(a, gap), InvalidConfig);
}

TEST_CASE("trial results") {
  auto cfg = small_config(16384);
  auto r = run_trial(cfg, 16384, 3);
  CHECK(r.opt.kind == OracleKind::exact);
  CHECK(r.ratio == doctest::Approx(r.cost / r.opt.value));
  auto again = run_trial(cfg, 16384, 3);
  CHECK(dump(trial_to_json(r)) == dump(trial_to_json(again)));

  auto tsp = small_config(1024, 12);
  auto f = run_trial(tsp, 1024, 1);
  CHECK(f.trace.arrival_order_fallback);
  CHECK(f.opt.kind == OracleKind::heuristic_upper);
  CHECK(f.ratio <= 10.0);
}

TEST_CASE("sorted input smoke run") {
  auto cfg = small_config(16384);
  std::vector<double> v(16384);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i + 0.5) / v.size();
  auto r = run_trial_on(cfg, PointSet::from_values(v), 0);
  CHECK(r.cost > 0.0);
  CHECK(std::isfinite(r.ratio));
}

TEST_CASE("config validation") {
  auto cfg = small_config(4096, 2);
  cfg.distribution = DistributionSpec::from_quantile([](double u) { return u * u; }, "sq");
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = small_config(4096);
  cfg.ns.clear();
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("bin state bookkeeping") {
  BinState s({2, 1});
  s.throw_into(1);
  CHECK_FALSE(s.first_overflow());
  s.throw_into(1);
  CHECK(s.first_overflow() == 1u);
  s.throw_into(0);
  s.throw_into(0);
  CHECK(s.all_full() == 4u);
  CHECK(s.loads()[0] == 2);
  CHECK(s.loads()[1] == 1);
}

TEST_CASE("bin timing: a single bin") {
  auto cfg = BinSimConfig::equal(1, 37, 20, 1, 1 << 20);
  auto rep = verify_lemma1(cfg);
  for (const auto& run : rep.runs) {
    CHECK(run.first_overflow == 37);
    CHECK(run.all_full == 37);
  }
}

TEST_CASE("bin timing: two unit bins against enumeration") {
  // Enumerate every 0/1 throw sequence of length 4; a sequence that has not
  // filled both bins by then has probability 2/16.
  double p_full[5] = {0, 0, 0, 0, 0};
  for (int mask = 0; mask < 16; ++mask) {
    BinState s({1, 1});
    for (int t = 0; t < 4 && !s.all_full(); ++t) s.throw_into((mask >> t) & 1);
    if (s.all_full()) p_full[*s.all_full()] += 1.0 / 16;
  }
  CHECK(p_full[2] == doctest::Approx(0.5));
  CHECK(p_full[3] == doctest::Approx(0.25));
  CHECK(p_full[4] == doctest::Approx(0.125));
  // Geometric tail gives E[T'] = sum t 2^{-(t-1)} over t >= 2 = 3, and
  // E[T] = 1/2 * 1 + 1/2 * 2 = 1.5.
  auto rep = verify_lemma1(BinSimConfig::equal(2, 1, 20000, 9, 1 << 20));
  CHECK(rep.all_full.mean == doctest::Approx(3.0).epsilon(0.03));
  CHECK(rep.first_overflow.mean == doctest::Approx(1.5).epsilon(0.03));
  for (const auto& r : rep.runs) CHECK(r.first_overflow <= r.all_full);
}

TEST_CASE("bin timing at moderate scale") {
  auto rep = verify_lemma1(BinSimConfig::equal(64, 100, 100, 3, 1 << 20));
  CHECK(rep.total == 6400);
  CHECK(rep.pass);
  CHECK(rep.early_overflow_ok[0] <= rep.early_overflow_ok[2]);
  CHECK(rep.late_fill_ok[1] <= rep.late_fill_ok[2]);
}

TEST_CASE("quantiles") {
  auto q = quantiles({5, 1, 4, 2, 3});
  CHECK(q.min == 1);
  CHECK(q.max == 5);
  CHECK(q.median == 3);
  CHECK(q.mean == 3);
  CHECK(q.p95 == 5);
  CHECK(q.p05 == 1);
}

TEST_CASE("fill before overflow report") {
  auto vac = small_config(4096);
  vac.backyard_constant = 100.0;
  auto rep = verify_fill_before_overflow(vac);
  CHECK(rep.vacuous);
  CHECK(rep.k == 1);

  auto multi = small_config(1 << 16);
  multi.backyard_constant = 2.0;
  auto m = verify_fill_before_overflow(multi);
  CHECK_FALSE(m.vacuous);
  CHECK(m.boundary_success.size() == static_cast<std::size_t>(m.k - 1));
  CHECK(m.overall_success >= 0.75);
}

TEST_CASE("constant input inverts the fill statistic") {
  auto cfg = small_config(1 << 14);
  cfg.backyard_constant = 2.0;
  auto r = run_trial_on(cfg, PointSet::from_values(std::vector<double>(1 << 14, 0.4)), 0);
  CHECK(r.failed);
  CHECK_FALSE(r.trace.all_filled_before_overflow());
}

TEST_CASE("experiment aggregation ignores scheduling") {
  auto cfg = small_config(8192);
  cfg.ns = {8, 8192, 16384};
  cfg.threads = 1;
  auto serial = run_experiment(cfg);
  cfg.threads = 4;
  auto parallel = run_experiment(cfg);
  CHECK(serial.skipped == std::vector<std::size_t>{8});
  REQUIRE(serial.groups.size() == 2);
  CHECK(dump(summary_json(serial)) == dump(summary_json(parallel)));
  CHECK(trials_csv(serial.trials) == trials_csv(parallel.trials));
  REQUIRE(serial.fit.has_value());

  // Summaries do not depend on the order trials are folded in.
  auto shuffled = std::vector<TrialResult>(serial.trials.begin(), serial.trials.begin() + 4);
  std::reverse(shuffled.begin(), shuffled.end());
  auto g = summarize(8192, shuffled);
  CHECK(g.median_ratio == serial.groups[0].median_ratio);
  CHECK(g.mean_ratio == doctest::Approx(serial.groups[0].mean_ratio).epsilon(1e-12));
}

TEST_CASE("sweep fit") {
  std::vector<GroupSummary> g(3);
  const std::size_t ns[] = {1 << 10, 1 << 12, 1 << 14};
  const double norm[] = {1.0, 1.2, 0.9};
  for (int i = 0; i < 3; ++i) {
    g[i].n = ns[i];
    const double l = std::log2(static_cast<double>(ns[i]));
    g[i].mean_ratio = norm[i] * l * l;
    g[i].normalized_ratio = norm[i];
  }
  auto fit = fit_sweep(g);
  CHECK(fit.max_drift == doctest::Approx(1.2));
  CHECK(fit.slope > 0.9);
  CHECK(fit.slope < 1.2);
}

TEST_CASE("reports") {
  auto cfg = small_config(8192);
  cfg.trials = 1;
  auto rep = run_experiment(cfg);
  const std::string csv = trials_csv(rep.trials);
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  REQUIRE(all.size() == 3);
  CHECK(all[0] == kCsvVersionLine);
  CHECK(all[1].rfind("n,d,p,backyard_constant,seed,trial,cost,opt", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "stochsort_report_test";
  std::filesystem::remove_all(dir);
  auto first = emit_report(rep, Format::csv, dir / "a");
  auto second = emit_report(rep, Format::csv, dir / "b");
  REQUIRE(first.size() == 2);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(first[i]) == slurp(second[i]));
  auto json = emit_report(rep, Format::json, dir / "c");
  CHECK(json[0].filename() == "runs.jsonl");
  CHECK(Json::parse(slurp(json[0])).at("n") == 8192);

  auto summary = Json::parse(slurp(first[1]));
  CHECK_NOTHROW(validate_summary(summary));
  auto broken = summary;
  broken["groups"][0].erase("mean_ratio");
  CHECK_THROWS_AS(validate_summary(broken), InvalidConfig);
  broken = summary;
  broken["schema"] = "other";
  CHECK_THROWS_AS(validate_summary(broken), InvalidConfig);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(write_file("/proc/forbidden/x.txt", "x"), IoError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}
