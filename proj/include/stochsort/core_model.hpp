#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stochsort {

/// A point of [0,1]^d viewed in place; d == 1 for sorting.
using ValuePoint = std::span<const double>;

/// Owning, flat storage for a sequence of points of one fixed dimension.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords);

  /// Builds a one-dimensional set.
  static PointSet from_values(std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }

  ValuePoint operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  void push_back(ValuePoint p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t dim_ = 1;
  std::vector<double> coords_;
};

/// The length-n output array. A cell is written at most once.
class PlacementArray {
 public:
  PlacementArray(std::size_t n, std::size_t dim);

  std::size_t size() const { return filled_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t filled_count() const { return filled_count_; }
  bool full() const { return filled_count_ == filled_.size(); }

  bool filled(std::size_t cell) const { return filled_[cell] != 0; }
  std::optional<ValuePoint> at(std::size_t cell) const;
  /// Unchecked view of a filled cell.
  ValuePoint point(std::size_t cell) const {
    return {coords_.data() + cell * dim_, dim_};
  }

  /// Writes `p` into an empty cell; throws CellOccupied otherwise.
  void write(std::size_t cell, ValuePoint p);

  /// Lowest-indexed empty cell at or after `from`, or size() if none.
  std::size_t next_empty(std::size_t from) const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<std::uint8_t> filled_;
  std::size_t filled_count_ = 0;
};

enum class DistributionKind { uniform, inverse_cdf };

/// A known input distribution, given per coordinate by its quantile function.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::uniform;
  std::function<double(double)> quantile;  // only for inverse_cdf
  std::string label = "uniform";

  static DistributionSpec uniform();
  static DistributionSpec from_quantile(std::function<double(double)> q,
                                        std::string label);
  /// Two-column (u, Q(u)) text samples, linearly interpolated. Lines starting
  /// with '#' and blank lines are ignored.
  static DistributionSpec from_cdf_file(const std::string& path);

  double apply(double u) const {
    return kind == DistributionKind::uniform ? u : quantile(u);
  }

  /// Throws NonMonotoneQuantile unless Q is nondecreasing with Q(0)=0 and
  /// Q(1)=1 on a 1025-point grid (tolerance 1e-9).
  void validate() const;
};

struct AlgorithmConfig {
  std::size_t n = 0;
  std::size_t d = 1;
  double log_exponent = 2.0;
  double backyard_constant = 100.0;
  std::uint64_t seed = 0;
  DistributionSpec distribution = DistributionSpec::uniform();

  /// Throws InvalidConfig on out-of-range fields.
  void validate() const;
};

/// log2(n)^p.
double log_power(std::size_t n, double p);

/// The unique l >= 1 with n/(4 log2^p n) < 2^l <= n/(2 log2^p n).
/// Throws InstanceTooSmall when n/(2 log2^p n) < 2.
int compute_ell(std::size_t n, double p);

/// Sum of Euclidean distances between consecutive cells.
/// Throws IncompleteArray when any cell is empty.
double tour_cost(const PlacementArray& array);

/// Path cost of the points in the given order.
double path_cost(const PointSet& points);
double path_cost(const PointSet& points, std::span<const std::size_t> order);

double distance(ValuePoint a, ValuePoint b);

/// Exact offline optimum for d = 1: max - min.
double opt_sort_cost(std::span<const double> values);

/// K+1 equal-mass boundaries b_j = Q(j/K).
std::vector<double> quantile_boundaries(const DistributionSpec& dist,
                                        std::size_t k);

}  // namespace stochsort
