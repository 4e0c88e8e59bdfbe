#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "stochsort/core_model.hpp"
#include "stochsort/geometry.hpp"

namespace stochsort {

enum class OracleKind { exact, heuristic_upper, reference };

std::string_view to_string(OracleKind kind);

struct OracleEstimate {
  double value = 0.0;
  OracleKind kind = OracleKind::exact;
  std::size_t n = 0;
  std::size_t d = 1;
  bool applicable = true;
};

constexpr std::size_t kMaxExactPath = 14;

/// Minimum open-path cost over all visiting orders (Held-Karp over subsets,
/// free endpoints). Throws TooLarge above kMaxExactPath points.
OracleEstimate tsp_path_exact(const PointSet& points);

/// Nearest-neighbour path from the first point, then first-improvement 2-opt
/// (segment reversals, endpoint moves included) over 10-nearest-neighbour
/// candidate lists, at most 50 passes. Deterministic in the input order.
std::vector<std::size_t> heuristic_path_order(const PointSet& points);
OracleEstimate tsp_path_heuristic(const PointSet& points);

/// Per-block heuristic paths concatenated in serpentine block order. Each
/// block path is entered at whichever of its two ends lies closer to the
/// previous block's exit point.
OracleEstimate block_tour_cost(const PointSet& points, const BlockPartition& partition);

struct BhhReference {
  OracleEstimate estimate;  // sqrt(d / (2 pi e)) n^{1 - 1/d}
  double mean_distance_lower = 0.0;  // sqrt(d) / 3
  double mean_distance_upper = 0.0;  // sqrt(d / 6)
};

/// Asymptotic uniform TSP length in [0,1]^d and bounds on the mean distance
/// of two uniform points. Not applicable for d = 1.
BhhReference bhh_reference(std::size_t n, std::size_t d);

}  // namespace stochsort
