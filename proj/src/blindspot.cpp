#include "mtsplan/blindspot.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "mtsplan/error.hpp"

namespace mtsplan {

BlindSpotSet sense(const Heatmap& heatmap, double delta_dbm) {
  BlindSpotSet out{{}, delta_dbm, {}};
  for (std::size_t k = 0; k < heatmap.rss_dbm.size(); ++k) {
    if (heatmap.excluded && *heatmap.excluded == k) continue;
    if (heatmap.rss_dbm[k] < delta_dbm) {
      const CellIndex c = heatmap.grid.cell(k);
      out.cells.push_back(c);
      out.positions.push_back(heatmap.grid.center(c));
    }
  }
  return out;
}

std::vector<int> Clustering::sizes() const {
  std::vector<int> s(clusters, 0);
  for (int a : assignment) ++s[a];
  return s;
}

std::vector<std::size_t> Clustering::members(int cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < assignment.size(); ++p)
    if (assignment[p] == cluster) out.push_back(p);
  return out;
}

namespace {

double sq(const Vec2& a, const Vec2& b) {
  const Vec2 d = a - b;
  return dot(d, d);
}

// Farthest-point seeding starting from point 0. Exact distance ties are broken by a
// seeded random priority over point indices.
std::vector<Vec2> seed_centroids(std::span<const Vec2> points, int clusters, std::uint64_t seed) {
  std::vector<Vec2> centroids;
  if (points.empty()) return std::vector<Vec2>(clusters, Vec2{});
  const std::size_t n = points.size();
  std::vector<std::size_t> priority(n);
  std::iota(priority.begin(), priority.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(priority.begin(), priority.end(), rng);

  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = 0;
  const std::size_t distinct = std::min<std::size_t>(clusters, n);
  for (std::size_t k = 0; k < distinct; ++k) {
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t p = 0; p < n; ++p) nearest[p] = std::min(nearest[p], sq(points[p], points[pick]));
    std::optional<std::size_t> next;
    for (std::size_t p = 0; p < n; ++p) {
      if (chosen[p]) continue;
      if (!next || nearest[p] > nearest[*next] ||
          (nearest[p] == nearest[*next] && priority[p] < priority[*next]))
        next = p;
    }
    if (next) pick = *next;
  }
  // More clusters than points: surplus centroids sit on point 0 and lose every tie.
  while (static_cast<int>(centroids.size()) < clusters) centroids.push_back(points[0]);
  return centroids;
}

std::vector<int> assign_with_capacity(std::span<const Vec2> points,
                                      const std::vector<Vec2>& centroids, int capacity) {
  const int m = static_cast<int>(centroids.size());
  std::vector<int> load(m, 0);
  std::vector<int> assignment(points.size(), -1);
  std::vector<int> order(m);
  std::vector<double> dist(m);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int k = 0; k < m; ++k) dist[k] = sq(points[p], centroids[k]);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
    for (int k : order) {
      if (load[k] < capacity) {
        assignment[p] = k;
        ++load[k];
        break;
      }
    }
  }
  return assignment;
}

}  // namespace

std::vector<Vec2> cluster_means(std::span<const Vec2> points, const std::vector<int>& assignment,
                                const std::vector<Vec2>& previous) {
  std::vector<Vec2> sum(previous.size());
  std::vector<int> count(previous.size(), 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    sum[assignment[p]] = sum[assignment[p]] + points[p];
    ++count[assignment[p]];
  }
  std::vector<Vec2> out(previous.size());
  for (std::size_t k = 0; k < previous.size(); ++k)
    out[k] = count[k] > 0 ? sum[k] / static_cast<double>(count[k]) : previous[k];
  return out;
}

Clustering capacity_kmeans(std::span<const Vec2> points, int clusters, int capacity,
                           std::uint64_t seed, const KMeansOptions& options) {
  if (clusters < 1) throw ValidationError("cluster count must be at least 1");
  if (capacity < 1) throw ValidationError("cluster capacity must be at least 1");
  if (static_cast<long long>(clusters) * capacity < static_cast<long long>(points.size()))
    throw ValidationError("infeasible clustering: M*C = " +
                          std::to_string(static_cast<long long>(clusters) * capacity) + " < " +
                          std::to_string(points.size()) + " points");

  Clustering result{clusters, capacity, {}, seed_centroids(points, clusters, seed)};
  std::vector<int> previous;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    auto assignment = assign_with_capacity(points, result.centroids, capacity);
    result.iterations = iter + 1;
    if (options.on_assignment) options.on_assignment(assignment, result.centroids);
    if (assignment == previous) {
      result.converged = true;
      break;
    }
    result.centroids = cluster_means(points, assignment, result.centroids);
    previous = std::move(assignment);
  }
  result.assignment = std::move(previous);
  return result;
}

double within_cluster_ssd(const Clustering& clustering, std::span<const Vec2> points) {
  double total = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p)
    total += sq(points[p], clustering.centroids[clustering.assignment[p]]);
  return total;
}

}  // namespace mtsplan
