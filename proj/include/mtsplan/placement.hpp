#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtsplan/blindspot.hpp"
#include "mtsplan/plan.hpp"
#include "mtsplan/raytrace.hpp"
#include "mtsplan/scene.hpp"

namespace mtsplan {

/// No feasible interval has enough free length left for another panel.
class NoRoomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point on wall `wall` where a ray from `ap` reflects specularly toward `target`.
/// Returns nullopt when the mirror line misses the segment interior (endpoint hits
/// included). Throws ValidationError unless ap and target lie strictly on the same side.
std::optional<Vec2> specular_point(const Scene& scene, std::size_t wall, const Vec2& ap,
                                   const Vec2& target);

/// Pose for one cluster: best specular point over feasible walls, moved to the nearest
/// free spot of the feasible region when it is infeasible or taken.
MtsPose place_for_cluster(const Scene& scene, const Vec2& ap, const Vec2& centroid,
                          const MtsSpec& spec, const std::vector<MtsPose>& occupied);

/// Quantized conjugate beam: each atom takes the phase in {0, π} closest to -arg(a_n b_n)
/// with the panel's beam target as receiver.
PhaseVector virtual_phases(const Scene& scene, const DeploymentPlan& plan);

Heatmap virtual_heatmap(const Scene& scene, const DeploymentPlan& plan, const GridMap& grid,
                        const ComputeOptions& opts = {});

struct DeployOptions {
  double delta_dbm = -78.0;
  int capacity = 6;
  MtsSpec spec;
  std::uint64_t seed = 1;
  ComputeOptions compute;
};

enum class DeployStatus { Cleared, MaxReached, NoRoom };
std::string to_string(DeployStatus status);

struct GreedyIteration {
  int clusters;
  std::size_t targets;    ///< blind cells clustered this round
  std::size_t remaining;  ///< blind cells after virtual deployment
};

struct GreedyResult {
  DeploymentPlan plan;
  Heatmap direct;
  Heatmap virtual_map;
  BlindSpotSet initial;
  BlindSpotSet remaining;
  std::optional<Clustering> clustering;
  std::vector<GreedyIteration> trace;
  int initial_clusters = 0;  ///< ceil(B / C)
  int max_clusters = 0;      ///< 4 * initial + 4
  DeployStatus status = DeployStatus::Cleared;
};

/// ceil(blind / capacity)
int initial_mts_count(std::size_t blind, int capacity);

/// Greedy MTS count search: start from ceil(B/C) panels, virtually deploy, re-sense and
/// add one panel per round until no blind spot remains or the round limit is reached.
GreedyResult greedy_deploy(const Scene& scene, const GridMap& grid, const DeployOptions& options);

}  // namespace mtsplan
