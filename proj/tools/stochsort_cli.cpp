// stochsort: Monte Carlo harness for stochastic online sorting and online TSP.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <string>

#include "stochsort/errors.hpp"
#include "stochsort/harness.hpp"
#include "stochsort/report.hpp"

using namespace stochsort;

namespace {

struct Options {
  std::vector<std::size_t> ns;
  std::size_t d = 1;
  double p = 2.0;
  double backyard_constant = 100.0;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::string dist = "uniform";
  std::string out = "out";
  std::string format = "csv";
  unsigned threads = 0;
  std::size_t bins = 256;
  std::size_t capacity = 100;
};

DistributionSpec parse_dist(const std::string& s) {
  if (s == "uniform") return DistributionSpec::uniform();
  if (s.rfind("cdf:", 0) == 0) return DistributionSpec::from_cdf_file(s.substr(4));
  throw InvalidConfig("unknown distribution '" + s + "' (use uniform or cdf:<file>)");
}

ExperimentConfig to_config(Mode mode, const Options& o) {
  ExperimentConfig c;
  c.mode = mode;
  c.ns = o.ns;
  c.d = o.d;
  c.p = o.p;
  c.backyard_constant = o.backyard_constant;
  c.trials = o.trials;
  c.seed = o.seed;
  c.distribution = parse_dist(o.dist);
  c.threads = o.threads;
  return c;
}

void add_common(CLI::App* cmd, Options& o, bool needs_d) {
  cmd->add_option("--n", o.ns, "Instance sizes (repeatable)")->required()->expected(1, -1);
  if (needs_d) cmd->add_option("--d", o.d, "Dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--p", o.p, "Log exponent p in log^p n")->check(CLI::Range(1.0, 3.0));
  cmd->add_option("--backyard-constant", o.backyard_constant, "Backyard constant c")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trials", o.trials, "Trials per n")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--dist", o.dist, "uniform | cdf:<file>");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "Trial output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void print_summary(const ExperimentReport& rep) {
  for (auto n : rep.skipped) std::cout << "n=" << n << ": skipped (instance too small)\n";
  for (const auto& g : rep.groups) {
    std::cout << "n=" << g.n << " trials=" << g.trials
              << " mean_ratio=" << format_number(g.mean_ratio)
              << " ratio/log2^2n=" << format_number(g.normalized_ratio)
              << " failure_rate=" << format_number(g.failure_rate)
              << " mean_k=" << format_number(g.mean_k) << " opt=" << to_string(g.opt_kind)
              << (g.arrival_order_fallback ? " (arrival order)" : "") << '\n';
  }
  if (rep.fit) {
    std::cout << "fit: slope=" << format_number(rep.fit->slope)
              << " max_drift=" << format_number(rep.fit->max_drift) << '\n';
  }
}

int run_mode(Mode mode, const Options& o) {
  const ExperimentConfig cfg = to_config(mode, o);
  const ExperimentReport rep = run_experiment(cfg);
  if (rep.trials.empty()) {
    std::cerr << "no instance size produced a valid phase structure\n";
    return 2;
  }
  const auto files = emit_report(rep, o.format == "json" ? Format::json : Format::csv, o.out);
  print_summary(rep);
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int run_bins(const Options& o) {
  BinSimConfig cfg = BinSimConfig::equal(o.bins, o.capacity, o.trials, o.seed,
                                         o.ns.empty() ? std::size_t{1} << 20 : o.ns.front());
  const Lemma1Report rep = verify_lemma1(cfg);
  const auto path = std::filesystem::path(o.out) / "bins.json";
  write_file(path, dump(lemma1_json(rep)));
  std::cout << "K=" << rep.bins << " M=" << rep.total << " trials=" << rep.trials << '\n';
  for (std::size_t a = 0; a < kSlackMultipliers.size(); ++a) {
    std::cout << "a=" << format_number(kSlackMultipliers[a])
              << " early_overflow_ok=" << format_number(rep.early_overflow_ok[a])
              << " late_fill_ok=" << format_number(rep.late_fill_ok[a]) << '\n';
  }
  std::cout << (rep.pass ? "PASS" : "FAIL") << "\nwrote " << path.string() << '\n';
  return rep.pass ? 0 : 1;
}

int run_fill(const Options& o) {
  const FillReport rep = verify_fill_before_overflow(to_config(Mode::verify_fill, o));
  const auto path = std::filesystem::path(o.out) / "fill.json";
  write_file(path, dump(fill_json(rep)));
  std::cout << "n=" << rep.n << " k=" << rep.k << " trials=" << rep.trials << '\n';
  if (rep.vacuous) std::cout << "no phase boundary at this n (vacuous)\n";
  for (std::size_t j = 0; j < rep.boundary_success.size(); ++j) {
    std::cout << "boundary " << j + 1 << ": " << format_number(rep.boundary_success[j]) << '\n';
  }
  std::cout << "overall_success=" << format_number(rep.overall_success)
            << " failure_rate=" << format_number(rep.failure_rate) << "\nwrote "
            << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic online sorting and online TSP experiments"};
  app.require_subcommand(1);
  Options o;

  auto* sort1d = app.add_subcommand("sort1d", "1-D online sorting trials");
  add_common(sort1d, o, false);
  auto* tsp = app.add_subcommand("tsp", "d-dimensional online TSP trials");
  add_common(tsp, o, true);
  auto* sweep = app.add_subcommand("sweep", "Ratio sweep over n with a log^2 n fit");
  add_common(sweep, o, true);
  auto* fill = app.add_subcommand("verify-fill", "Fill-before-overflow statistics");
  add_common(fill, o, true);

  auto* bins = app.add_subcommand("verify-bins", "Balls-into-bins timing check");
  bins->add_option("--bins", o.bins, "Bin count K")->check(CLI::PositiveNumber);
  bins->add_option("--capacity", o.capacity, "Capacity per bin")->check(CLI::PositiveNumber);
  bins->add_option("--n", o.ns, "n whose log2 scales the slack")->expected(0, 1);
  bins->add_option("--trials", o.trials, "Simulations")->check(CLI::PositiveNumber);
  bins->add_option("--seed", o.seed, "Base seed");
  bins->add_option("--out", o.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sort1d->parsed()) return run_mode(Mode::sort1d, o);
    if (tsp->parsed()) {
      if (o.d < 2) throw InvalidConfig("tsp needs --d >= 2");
      return run_mode(Mode::tsp, o);
    }
    if (sweep->parsed()) return run_mode(Mode::sweep, o);
    if (fill->parsed()) return run_fill(o);
    if (bins->parsed()) return run_bins(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
