#include "stochsort/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>

#include "stochsort/errors.hpp"

namespace stochsort {

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::exact: return "exact";
    case OracleKind::heuristic_upper: return "heuristic_upper";
    case OracleKind::reference: return "reference";
  }
  return "unknown";
}

OracleEstimate tsp_path_exact(const PointSet& points) {
  const std::size_t n = points.size();
  if (n > kMaxExactPath) {
    throw TooLarge(std::to_string(n) + " points; exact path supports at most " +
                   std::to_string(kMaxExactPath));
  }
  OracleEstimate est{0.0, OracleKind::exact, n, points.dim(), true};
  if (n <= 1) return est;

  std::vector<double> dist(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) dist[a * n + b] = distance(points[a], points[b]);
  }
  const std::size_t full = (std::size_t{1} << n) - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[mask * n + last]: shortest path over `mask` ending at `last`.
  std::vector<double> best((full + 1) * n, kInf);
  for (std::size_t a = 0; a < n; ++a) best[(std::size_t{1} << a) * n + a] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t last = 0; last < n; ++last) {
      const double here = best[mask * n + last];
      if (here == kInf) continue;
      for (std::size_t next = 0; next < n; ++next) {
        if (mask & (std::size_t{1} << next)) continue;
        const std::size_t grown = mask | (std::size_t{1} << next);
        double& slot = best[grown * n + next];
        slot = std::min(slot, here + dist[last * n + next]);
      }
    }
  }
  est.value = *std::min_element(best.begin() + full * n, best.end());
  return est;
}

namespace {

constexpr std::size_t kNeighbours = 10;
constexpr int kMaxPasses = 50;
constexpr std::size_t kBruteForceLimit = 2048;

/// Uniform bucket grid over the bounding box of a point set, d <= 3.
class PointGrid {
 public:
  explicit PointGrid(const PointSet& pts) : pts_(pts) {
    const std::size_t d = pts.dim();
    const std::size_t n = pts.size();
    const double per_dim = std::pow(std::max<double>(1.0, n / 2.0), 1.0 / d);
    for (std::size_t k = 0; k < 3; ++k) {
      if (k >= d) {
        lo_[k] = 0.0;
        width_[k] = 1.0;
        g_[k] = 1;
        continue;
      }
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, pts[i][k]);
        hi = std::max(hi, pts[i][k]);
      }
      g_[k] = std::max<long>(1, static_cast<long>(per_dim));
      lo_[k] = lo;
      width_[k] = hi > lo ? (hi - lo) / g_[k] : 1.0;
    }
    min_width_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d; ++k) min_width_ = std::min(min_width_, width_[k]);
    cells_.resize(static_cast<std::size_t>(g_[0] * g_[1] * g_[2]));
    cell_of_.resize(n);
    slot_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = coord(pts[i]);
      std::size_t id = index(c);
      cell_of_[i] = static_cast<std::uint32_t>(id);
      slot_[i] = static_cast<std::uint32_t>(cells_[id].size());
      cells_[id].push_back(static_cast<std::uint32_t>(i));
    }
  }

  std::array<long, 3> coord(ValuePoint x) const {
    std::array<long, 3> c{0, 0, 0};
    for (std::size_t k = 0; k < pts_.dim(); ++k) {
      long v = static_cast<long>((x[k] - lo_[k]) / width_[k]);
      c[k] = std::clamp<long>(v, 0, g_[k] - 1);
    }
    return c;
  }

  std::size_t index(const std::array<long, 3>& c) const {
    return static_cast<std::size_t>(c[0] + g_[0] * (c[1] + g_[1] * c[2]));
  }

  void remove(std::uint32_t p) {
    auto& cell = cells_[cell_of_[p]];
    std::uint32_t moved = cell.back();
    cell[slot_[p]] = moved;
    slot_[moved] = slot_[p];
    cell.pop_back();
  }

  long max_radius() const { return std::max({g_[0], g_[1], g_[2]}); }
  double min_width() const { return min_width_; }

  /// Calls f(id) for every point in cells at Chebyshev distance exactly r.
  template <class F>
  std::size_t visit_ring(const std::array<long, 3>& c, long r, F&& f) const {
    std::size_t visited = 0;
    for (long a = std::max(0L, c[0] - r); a <= std::min(g_[0] - 1, c[0] + r); ++a) {
      for (long b = std::max(0L, c[1] - r); b <= std::min(g_[1] - 1, c[1] + r); ++b) {
        for (long e = std::max(0L, c[2] - r); e <= std::min(g_[2] - 1, c[2] + r); ++e) {
          long cheb = std::max({std::labs(a - c[0]), std::labs(b - c[1]), std::labs(e - c[2])});
          if (cheb != r) continue;
          ++visited;
          for (auto id : cells_[index({a, b, e})]) f(id);
        }
      }
    }
    return visited;
  }

 private:
  const PointSet& pts_;
  std::array<double, 3> lo_{};
  std::array<double, 3> width_{};
  std::array<long, 3> g_{1, 1, 1};
  double min_width_ = 1.0;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::uint32_t> slot_;
};

bool use_grid(const PointSet& pts) {
  return pts.dim() <= 3 && pts.size() > kBruteForceLimit;
}

std::vector<std::uint32_t> nearest_neighbour_path(const PointSet& pts) {
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> path;
  path.reserve(n);
  std::vector<std::uint32_t> remaining(n);
  std::vector<std::uint32_t> where(n);
  for (std::size_t i = 0; i < n; ++i) {
    remaining[i] = static_cast<std::uint32_t>(i);
    where[i] = static_cast<std::uint32_t>(i);
  }
  auto drop = [&](std::uint32_t p) {
    std::uint32_t moved = remaining.back();
    remaining[where[p]] = moved;
    where[moved] = where[p];
    remaining.pop_back();
  };

  std::optional<PointGrid> grid;
  if (use_grid(pts)) grid.emplace(pts);

  std::uint32_t cur = 0;
  path.push_back(cur);
  drop(cur);
  if (grid) grid->remove(cur);
  while (!remaining.empty()) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t pick = remaining.front();
    auto consider = [&](std::uint32_t id) {
      double dd = distance(pts[cur], pts[id]);
      if (dd < best || (dd == best && id < pick)) {
        best = dd;
        pick = id;
      }
    };
    bool done = false;
    if (grid) {
      auto c = grid->coord(pts[cur]);
      std::size_t scanned = 0;
      for (long r = 0; r <= grid->max_radius(); ++r) {
        scanned += grid->visit_ring(c, r, consider);
        if (best <= r * grid->min_width()) {
          done = true;
          break;
        }
        if (scanned > 4 * remaining.size()) break;
      }
    }
    if (!done) {
      best = std::numeric_limits<double>::infinity();
      for (auto id : remaining) consider(id);
    }
    cur = pick;
    path.push_back(cur);
    drop(cur);
    if (grid) grid->remove(cur);
  }
  return path;
}

/// K nearest other points of every point, nearest first.
std::vector<std::vector<std::uint32_t>> neighbour_lists(const PointSet& pts,
                                                        std::size_t k) {
  const std::size_t n = pts.size();
  k = std::min(k, n - 1);
  std::vector<std::vector<std::uint32_t>> out(n);
  std::vector<std::pair<double, std::uint32_t>> cand;
  auto keep_best = [&](std::vector<std::uint32_t>& dst) {
    auto cmp = [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second < b.second);
    };
    std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end(), cmp);
    dst.clear();
    for (std::size_t i = 0; i < take; ++i) dst.push_back(cand[i].second);
  };

  if (!use_grid(pts)) {
    for (std::size_t i = 0; i < n; ++i) {
      cand.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) cand.emplace_back(distance(pts[i], pts[j]), static_cast<std::uint32_t>(j));
      }
      keep_best(out[i]);
    }
    return out;
  }

  PointGrid grid(pts);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    auto c = grid.coord(pts[i]);
    for (long r = 0; r <= grid.max_radius(); ++r) {
      grid.visit_ring(c, r, [&](std::uint32_t id) {
        if (id != i) cand.emplace_back(distance(pts[i], pts[id]), id);
      });
      if (cand.size() >= k) {
        std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
        if (cand[k - 1].first <= r * grid.min_width()) break;
      }
    }
    keep_best(out[i]);
  }
  return out;
}

void two_opt(const PointSet& pts, std::vector<std::uint32_t>& tour) {
  const std::size_t n = tour.size();
  if (n < 3) return;
  auto nbrs = neighbour_lists(pts, kNeighbours);
  std::vector<std::uint32_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[tour[i]] = static_cast<std::uint32_t>(i);
  auto dist = [&](std::size_t a, std::size_t b) {
    return distance(pts[tour[a]], pts[tour[b]]);
  };
  auto reverse = [&](std::size_t a, std::size_t b) {
    std::reverse(tour.begin() + a, tour.begin() + b + 1);
    for (std::size_t i = a; i <= b; ++i) pos[tour[i]] = static_cast<std::uint32_t>(i);
  };
  constexpr double kEps = 1e-12;

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool improved = false;
    for (std::size_t u = 0; u < n; ++u) {
      for (auto v : nbrs[u]) {
        std::size_t i = std::min(pos[u], pos[v]);
        std::size_t j = std::max(pos[u], pos[v]);
        if (j == i + 1) continue;
        // Join the two points and their successors: reverse (i, j].
        double delta = dist(i, j) - dist(i, i + 1);
        if (j + 1 < n) delta += dist(i + 1, j + 1) - dist(j, j + 1);
        if (delta < -kEps) {
          reverse(i + 1, j);
          improved = true;
          continue;
        }
        // Join the two points and their predecessors: reverse [i, j).
        delta = dist(i, j) - dist(j - 1, j);
        if (i > 0) delta += dist(i - 1, j - 1) - dist(i - 1, i);
        if (delta < -kEps) {
          reverse(i, j - 1);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
}

}  // namespace

std::vector<std::size_t> heuristic_path_order(const PointSet& points) {
  if (points.empty()) return {};
  auto tour = nearest_neighbour_path(points);
  two_opt(points, tour);
  return {tour.begin(), tour.end()};
}

OracleEstimate tsp_path_heuristic(const PointSet& points) {
  auto order = heuristic_path_order(points);
  return {path_cost(points, order), OracleKind::heuristic_upper, points.size(),
          points.dim(), true};
}

OracleEstimate block_tour_cost(const PointSet& points, const BlockPartition& partition) {
  std::vector<std::vector<std::size_t>> members(partition.block_count());
  for (std::size_t i = 0; i < points.size(); ++i) {
    members[partition.order_index_of(points[i]) - 1].push_back(i);
  }
  OracleEstimate est{0.0, OracleKind::heuristic_upper, points.size(), points.dim(), true};
  std::optional<std::size_t> exit;
  for (const auto& block : members) {
    if (block.empty()) continue;
    PointSet sub(points.dim());
    sub.reserve(block.size());
    for (auto id : block) sub.push_back(points[id]);
    auto order = heuristic_path_order(sub);
    if (exit) {
      const double to_front = distance(points[*exit], sub[order.front()]);
      const double to_back = distance(points[*exit], sub[order.back()]);
      if (to_back < to_front) std::reverse(order.begin(), order.end());
      est.value += std::min(to_front, to_back);
    }
    est.value += path_cost(sub, order);
    exit = block[order.back()];
  }
  return est;
}

BhhReference bhh_reference(std::size_t n, std::size_t d) {
  const double dd = static_cast<double>(d);
  BhhReference ref;
  ref.estimate.kind = OracleKind::reference;
  ref.estimate.n = n;
  ref.estimate.d = d;
  ref.estimate.applicable = d >= 2;
  ref.estimate.value = std::sqrt(dd / (2.0 * std::numbers::pi * std::numbers::e)) *
                       std::pow(static_cast<double>(n), 1.0 - 1.0 / dd);
  ref.mean_distance_lower = std::sqrt(dd) / 3.0;
  ref.mean_distance_upper = std::sqrt(dd / 6.0);
  return ref;
}

}  // namespace stochsort
