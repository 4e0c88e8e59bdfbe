#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stochsort/harness.hpp"
#include <json.hpp>

namespace stochsort {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCsvVersionLine = "# stochsort-trials v1";
inline constexpr const char* kSummarySchema = "stochsort-summary/v1";

/// Shortest round-trip decimal form; "inf"/"nan" for non-finite values.
std::string format_number(double v);

Json trace_to_json(const RunTrace& trace);
Json trial_to_json(const TrialResult& trial);

/// Column order:
/// n,d,p,backyard_constant,seed,trial,cost,opt,opt_kind,ratio,failed,
/// within_buckets,between_buckets,between_subarrays,backyard,k,phases
/// where `phases` is the JSON array of per-phase records, CSV-quoted.
std::string trials_csv(const std::vector<TrialResult>& trials);
/// One trial_to_json document per line.
std::string trials_jsonl(const std::vector<TrialResult>& trials);

Json summary_json(const ExperimentReport& report);
Json lemma1_json(const Lemma1Report& report);
Json fill_json(const FillReport& report);

/// Throws InvalidConfig naming the first field that violates the summary
/// schema.
void validate_summary(const Json& summary);

enum class Format { csv, json };

/// Writes trials.csv or runs.jsonl plus summary.json into `dir`; returns the
/// paths written. Throws IoError.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, Format format,
                                               const std::filesystem::path& dir);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& text);

/// Deterministic dump: two-space indent, numbers through format_number.
std::string dump(const Json& j);

}  // namespace stochsort
