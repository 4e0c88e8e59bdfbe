#include "stochsort/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "stochsort/errors.hpp"

namespace stochsort {

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0) {
    throw InvalidConfig("coordinate count is not a multiple of the dimension");
  }
}

PointSet PointSet::from_values(std::vector<double> values) {
  return PointSet(1, std::move(values));
}

void PointSet::push_back(ValuePoint p) {
  coords_.insert(coords_.end(), p.begin(), p.end());
}

PlacementArray::PlacementArray(std::size_t n, std::size_t dim)
    : dim_(dim), coords_(n * dim, 0.0), filled_(n, 0) {}

std::optional<ValuePoint> PlacementArray::at(std::size_t cell) const {
  if (!filled_[cell]) return std::nullopt;
  return point(cell);
}

void PlacementArray::write(std::size_t cell, ValuePoint p) {
  if (cell >= filled_.size()) {
    throw CellOccupied("cell " + std::to_string(cell) + " is out of range");
  }
  if (filled_[cell]) {
    throw CellOccupied("cell " + std::to_string(cell) + " already written");
  }
  std::copy(p.begin(), p.end(), coords_.begin() + cell * dim_);
  filled_[cell] = 1;
  ++filled_count_;
}

std::size_t PlacementArray::next_empty(std::size_t from) const {
  while (from < filled_.size() && filled_[from]) ++from;
  return from;
}

DistributionSpec DistributionSpec::uniform() { return {}; }

DistributionSpec DistributionSpec::from_quantile(
    std::function<double(double)> q, std::string label) {
  DistributionSpec d;
  d.kind = DistributionKind::inverse_cdf;
  d.quantile = std::move(q);
  d.label = std::move(label);
  return d;
}

DistributionSpec DistributionSpec::from_cdf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CDF file " + path);
  auto us = std::make_shared<std::vector<double>>();
  auto qs = std::make_shared<std::vector<double>>();
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double u = 0, q = 0;
    if (!(row >> u >> q)) throw IoError("malformed CDF line: " + line);
    if (!us->empty() && u <= us->back()) {
      throw NonMonotoneQuantile("u column must be strictly increasing");
    }
    us->push_back(u);
    qs->push_back(q);
  }
  if (us->size() < 2 || us->front() != 0.0 || us->back() != 1.0) {
    throw NonMonotoneQuantile("CDF samples must span u = 0 .. 1");
  }
  auto q = [us, qs](double u) {
    auto it = std::upper_bound(us->begin(), us->end(), u);
    if (it == us->begin()) return qs->front();
    if (it == us->end()) return qs->back();
    auto hi = static_cast<std::size_t>(it - us->begin());
    auto lo = hi - 1;
    double t = (u - (*us)[lo]) / ((*us)[hi] - (*us)[lo]);
    return (*qs)[lo] + t * ((*qs)[hi] - (*qs)[lo]);
  };
  auto spec = from_quantile(q, "cdf:" + path);
  spec.validate();
  return spec;
}

void DistributionSpec::validate() const {
  if (kind == DistributionKind::uniform) return;
  if (!quantile) throw NonMonotoneQuantile("missing quantile function");
  constexpr double kTol = 1e-9;
  constexpr int kGrid = 1024;
  if (std::abs(quantile(0.0)) > kTol || std::abs(quantile(1.0) - 1.0) > kTol) {
    throw NonMonotoneQuantile("Q(0) must be 0 and Q(1) must be 1");
  }
  double prev = quantile(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    double cur = quantile(static_cast<double>(i) / kGrid);
    if (cur < prev - kTol) {
      throw NonMonotoneQuantile("Q decreases near u = " +
                                std::to_string(static_cast<double>(i) / kGrid));
    }
    prev = cur;
  }
}

void AlgorithmConfig::validate() const {
  if (d < 1) throw InvalidConfig("dimension must be >= 1");
  if (!(log_exponent >= 1.0 && log_exponent <= 3.0)) {
    throw InvalidConfig("log exponent must lie in [1, 3]");
  }
  if (!(backyard_constant > 0.0)) {
    throw InvalidConfig("backyard constant must be positive");
  }
  if (n < 2) throw InstanceTooSmall("n must be at least 2");
  distribution.validate();
}

double log_power(std::size_t n, double p) {
  return std::pow(std::log2(static_cast<double>(n)), p);
}

int compute_ell(std::size_t n, double p) {
  if (n < 2) throw InstanceTooSmall("n = " + std::to_string(n));
  const double upper = static_cast<double>(n) / (2.0 * log_power(n, p));
  if (upper < 2.0) {
    throw InstanceTooSmall("n = " + std::to_string(n) +
                           " leaves no bucket count: n/(2 log^p n) < 2");
  }
  int ell = 1;
  while (std::ldexp(1.0, ell + 1) <= upper) ++ell;
  return ell;
}

double distance(ValuePoint a, ValuePoint b) {
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double tour_cost(const PlacementArray& array) {
  if (!array.full()) {
    throw IncompleteArray(std::to_string(array.size() - array.filled_count()) +
                          " empty cells");
  }
  double cost = 0.0;
  for (std::size_t i = 1; i < array.size(); ++i) {
    cost += distance(array.point(i - 1), array.point(i));
  }
  return cost;
}

double path_cost(const PointSet& points) {
  double cost = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    cost += distance(points[i - 1], points[i]);
  }
  return cost;
}

double path_cost(const PointSet& points, std::span<const std::size_t> order) {
  double cost = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    cost += distance(points[order[i - 1]], points[order[i]]);
  }
  return cost;
}

double opt_sort_cost(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("opt_sort_cost of no values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

std::vector<double> quantile_boundaries(const DistributionSpec& dist,
                                        std::size_t k) {
  if (k == 0) throw InvalidConfig("K must be positive");
  std::vector<double> b(k + 1);
  b[0] = 0.0;
  b[k] = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    b[j] = dist.apply(static_cast<double>(j) / static_cast<double>(k));
  }
  for (std::size_t j = 1; j <= k; ++j) {
    if (!(b[j] > b[j - 1])) {
      throw NonMonotoneQuantile("boundary " + std::to_string(j) +
                                " does not increase");
    }
  }
  return b;
}

}  // namespace stochsort
