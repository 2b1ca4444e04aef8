#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mtsplan/geometry.hpp"
#include "mtsplan/raytrace.hpp"
#include "mtsplan/scene.hpp"

namespace mtsplan {

struct BlindSpotSet {
  std::vector<CellIndex> cells;  ///< row-major order
  double threshold_dbm;
  std::vector<Vec2> positions;   ///< cell centers, parallel to `cells`

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
};

/// Cells with RSS strictly below delta (including -inf), skipping the heatmap's excluded cell.
BlindSpotSet sense(const Heatmap& heatmap, double delta_dbm);

struct Clustering {
  int clusters;                 ///< M
  int capacity;                 ///< C
  std::vector<int> assignment;  ///< point index -> cluster id
  std::vector<Vec2> centroids;
  int iterations = 0;
  bool converged = false;

  std::vector<int> sizes() const;
  std::vector<std::size_t> members(int cluster) const;
};

struct KMeansOptions {
  int max_iters = 100;
  /// Called after every assignment step with the current assignment and centroids.
  std::function<void(const std::vector<int>&, const std::vector<Vec2>&)> on_assignment;
};

/// K-means whose assignment step respects a per-cluster capacity: points are visited in
/// input order and each takes its nearest centroid that still has room (ties to the lower
/// cluster id). Throws ValidationError when M < 1, C < 1 or M*C < |points|.
Clustering capacity_kmeans(std::span<const Vec2> points, int clusters, int capacity,
                           std::uint64_t seed, const KMeansOptions& options = {});

/// Σ over points of the squared distance to the assigned centroid.
double within_cluster_ssd(const Clustering& clustering, std::span<const Vec2> points);

/// Arithmetic mean of each cluster's members; empty clusters keep `previous`.
std::vector<Vec2> cluster_means(std::span<const Vec2> points, const std::vector<int>& assignment,
                                const std::vector<Vec2>& previous);

}  // namespace mtsplan
