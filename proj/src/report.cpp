#include "stochsort/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochsort/errors.hpp"

namespace stochsort {

namespace {

Json optional_json(const std::optional<std::size_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json phase_to_json(const PhaseRecord& p) {
  Json j;
  j["i"] = p.index;
  j["K"] = p.bucket_count;
  j["begin"] = p.begin;
  j["length"] = p.length;
  j["bin_capacity"] = p.bin_capacity;
  j["N_prev"] = p.prev_fill_at_overflow;
  j["N"] = optional_json(p.fill_at_overflow);
  j["T"] = optional_json(p.overflow_time);
  j["T_prime"] = optional_json(p.full_time);
  j["start_arrival"] = p.start_arrival;
  j["overflow_arrival"] = optional_json(p.overflow_arrival);
  j["full_arrival"] = optional_json(p.full_arrival);
  j["clamped_bins"] = p.clamped_bins;
  return j;
}

Json breakdown_json(const CostBreakdown& b) {
  Json j;
  j["within_buckets"] = b.within_buckets;
  j["between_buckets"] = b.between_buckets;
  j["between_subarrays"] = b.between_subarrays;
  j["backyard"] = b.backyard;
  return j;
}

Json quantiles_json(const Quantiles& q) {
  Json j;
  j["min"] = q.min;
  j["p05"] = q.p05;
  j["median"] = q.median;
  j["p95"] = q.p95;
  j["max"] = q.max;
  j["mean"] = q.mean;
  return j;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void require(bool ok, const std::string& field) {
  if (!ok) throw InvalidConfig("summary field '" + field + "' missing or malformed");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json trace_to_json(const RunTrace& t) {
  Json j;
  j["ell"] = t.ell;
  j["k"] = t.k;
  j["strategy"] = std::string(to_string(t.strategy));
  j["arrival_order_fallback"] = t.arrival_order_fallback;
  j["phases"] = Json::array();
  for (const auto& p : t.phases) j["phases"].push_back(phase_to_json(p));
  j["final_arrival"] = optional_json(t.final_arrival);
  j["fill_before_overflow"] = Json::array();
  for (bool b : t.fill_before_overflow) j["fill_before_overflow"].push_back(b);
  j["failed"] = t.failed;
  j["failure_arrival"] = optional_json(t.failure_arrival);
  j["backyard"] = {{"begin", t.backyard_begin},
                   {"size", t.backyard_size},
                   {"fill", t.backyard_fill},
                   {"failure_placements", t.failure_placements}};
  return j;
}

Json trial_to_json(const TrialResult& r) {
  Json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["p"] = r.p;
  j["backyard_constant"] = r.backyard_constant;
  j["seed"] = r.seed;
  j["trial"] = r.trial;
  j["cost"] = r.cost;
  j["opt"] = r.opt.value;
  j["opt_kind"] = std::string(to_string(r.opt.kind));
  j["ratio"] = finite_or_null(r.ratio);
  j["failed"] = r.failed;
  j["breakdown"] = breakdown_json(r.breakdown);
  j["trace"] = trace_to_json(r.trace);
  return j;
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << kCsvVersionLine << '\n'
      << "n,d,p,backyard_constant,seed,trial,cost,opt,opt_kind,ratio,failed,"
         "within_buckets,between_buckets,between_subarrays,backyard,k,phases\n";
  for (const auto& r : trials) {
    Json phases = Json::array();
    for (const auto& p : r.trace.phases) phases.push_back(phase_to_json(p));
    out << r.n << ',' << r.d << ',' << format_number(r.p) << ','
        << format_number(r.backyard_constant) << ',' << r.seed << ',' << r.trial << ','
        << format_number(r.cost) << ',' << format_number(r.opt.value) << ','
        << to_string(r.opt.kind) << ',' << format_number(r.ratio) << ','
        << (r.failed ? 1 : 0) << ',' << format_number(r.breakdown.within_buckets) << ','
        << format_number(r.breakdown.between_buckets) << ','
        << format_number(r.breakdown.between_subarrays) << ','
        << format_number(r.breakdown.backyard) << ',' << r.trace.k << ','
        << csv_quote(phases.dump()) << '\n';
  }
  return out.str();
}

std::string trials_jsonl(const std::vector<TrialResult>& trials) {
  std::string out;
  for (const auto& r : trials) {
    out += trial_to_json(r).dump();
    out += '\n';
  }
  return out;
}

Json summary_json(const ExperimentReport& rep) {
  const auto& c = rep.config;
  Json j;
  j["schema"] = kSummarySchema;
  j["mode"] = std::string(to_string(c.mode));
  j["config"] = {{"ns", c.ns},
                 {"d", c.d},
                 {"p", c.p},
                 {"backyard_constant", c.backyard_constant},
                 {"trials", c.trials},
                 {"seed", c.seed},
                 {"distribution", c.distribution.label}};
  j["opt_note"] = c.d == 1 ? "exact optimum (max - min)"
                           : "heuristic upper bound on the optimum; ratios are conservative";
  j["groups"] = Json::array();
  for (const auto& g : rep.groups) {
    Json gj;
    gj["n"] = g.n;
    gj["trials"] = g.trials;
    gj["mean_ratio"] = finite_or_null(g.mean_ratio);
    gj["median_ratio"] = finite_or_null(g.median_ratio);
    gj["p95_ratio"] = finite_or_null(g.p95_ratio);
    gj["normalized_ratio"] = finite_or_null(g.normalized_ratio);
    gj["mean_cost"] = g.mean_cost;
    gj["mean_opt"] = g.mean_opt;
    gj["opt_kind"] = std::string(to_string(g.opt_kind));
    gj["failure_rate"] = g.failure_rate;
    gj["mean_k"] = g.mean_k;
    gj["arrival_order_fallback"] = g.arrival_order_fallback;
    gj["mean_breakdown"] = breakdown_json(g.mean_breakdown);
    j["groups"].push_back(std::move(gj));
  }
  j["skipped"] = rep.skipped;
  if (rep.fit) {
    j["fit"] = {{"slope", rep.fit->slope}, {"max_drift", rep.fit->max_drift}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

Json lemma1_json(const Lemma1Report& rep) {
  Json j;
  j["schema"] = "stochsort-bins/v1";
  j["bins"] = rep.bins;
  j["total"] = rep.total;
  j["n_context"] = rep.n_context;
  j["trials"] = rep.trials;
  j["slack_multipliers"] = kSlackMultipliers;
  j["early_overflow_ok"] = rep.early_overflow_ok;
  j["late_fill_ok"] = rep.late_fill_ok;
  j["first_overflow"] = quantiles_json(rep.first_overflow);
  j["all_full"] = quantiles_json(rep.all_full);
  j["pass"] = rep.pass;
  return j;
}

Json fill_json(const FillReport& rep) {
  Json j;
  j["schema"] = "stochsort-fill/v1";
  j["n"] = rep.n;
  j["trials"] = rep.trials;
  j["k"] = rep.k;
  j["vacuous"] = rep.vacuous;
  j["boundary_success"] = rep.boundary_success;
  j["overall_success"] = rep.overall_success;
  j["failure_rate"] = rep.failure_rate;
  return j;
}

void validate_summary(const Json& s) {
  require(s.is_object(), "<root>");
  require(s.contains("schema") && s["schema"] == kSummarySchema, "schema");
  require(s.contains("mode") && s["mode"].is_string(), "mode");
  require(s.contains("config") && s["config"].is_object(), "config");
  const auto& c = s["config"];
  require(c.contains("ns") && c["ns"].is_array(), "config.ns");
  for (const char* key : {"d", "trials", "seed"}) {
    require(c.contains(key) && c[key].is_number_unsigned(), std::string("config.") + key);
  }
  for (const char* key : {"p", "backyard_constant"}) {
    require(c.contains(key) && c[key].is_number(), std::string("config.") + key);
  }
  require(c.contains("distribution") && c["distribution"].is_string(), "config.distribution");
  require(s.contains("groups") && s["groups"].is_array(), "groups");
  for (const auto& g : s["groups"]) {
    require(g.is_object(), "groups[]");
    for (const char* key : {"n", "trials"}) {
      require(g.contains(key) && g[key].is_number_unsigned(), std::string("groups[].") + key);
    }
    for (const char* key : {"mean_ratio", "median_ratio", "p95_ratio", "normalized_ratio"}) {
      require(g.contains(key) && (g[key].is_number() || g[key].is_null()),
              std::string("groups[].") + key);
    }
    for (const char* key : {"mean_cost", "mean_opt", "failure_rate", "mean_k"}) {
      require(g.contains(key) && g[key].is_number(), std::string("groups[].") + key);
    }
    require(g.contains("opt_kind") && g["opt_kind"].is_string(), "groups[].opt_kind");
    require(g.contains("arrival_order_fallback") && g["arrival_order_fallback"].is_boolean(),
            "groups[].arrival_order_fallback");
    require(g.contains("mean_breakdown") && g["mean_breakdown"].is_object(),
            "groups[].mean_breakdown");
    for (const char* key : {"within_buckets", "between_buckets", "between_subarrays", "backyard"}) {
      require(g["mean_breakdown"].contains(key) && g["mean_breakdown"][key].is_number(),
              std::string("groups[].mean_breakdown.") + key);
    }
  }
  require(s.contains("skipped") && s["skipped"].is_array(), "skipped");
  require(s.contains("fit") && (s["fit"].is_null() || (s["fit"].is_object() &&
                                                       s["fit"].contains("slope") &&
                                                       s["fit"].contains("max_drift"))),
          "fit");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, Format format,
                                               const std::filesystem::path& dir) {
  if (report.trials.empty()) throw InvalidConfig("no trials to report");
  std::vector<std::filesystem::path> written;
  if (format == Format::csv) {
    written.push_back(dir / "trials.csv");
    write_file(written.back(), trials_csv(report.trials));
  } else {
    written.push_back(dir / "runs.jsonl");
    write_file(written.back(), trials_jsonl(report.trials));
  }
  written.push_back(dir / "summary.json");
  write_file(written.back(), dump(summary_json(report)));
  return written;
}

}  // namespace stochsort
