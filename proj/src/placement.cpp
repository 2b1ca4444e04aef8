#include "mtsplan/placement.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "mtsplan/error.hpp"

namespace mtsplan {

std::optional<Vec2> specular_point(const Scene& scene, std::size_t wall_index, const Vec2& ap,
                                   const Vec2& target) {
  if (wall_index >= scene.walls().size()) throw ValidationError("wall index out of range");
  const Wall& wall = scene.walls()[wall_index];
  const int side = side_of_line(wall.a, wall.b, ap);
  if (side == 0 || side != side_of_line(wall.a, wall.b, target))
    throw ValidationError("specular point needs ap and target strictly on one side of the wall");
  const Vec2 image = reflect_across_line(ap, wall.a, wall.b);
  const auto hit = intersect_lines(image, target, wall.a, wall.b);
  if (!hit) return std::nullopt;
  const double t_pad = kGeomEps / wall.length();
  if (!(hit->t > t_pad && hit->t < 1.0 - t_pad)) return std::nullopt;
  return wall.point_at(hit->t);
}

namespace {

struct Interval {
  double lo;
  double hi;
};

// Arc-length positions on `wall` where a panel of `extent` can be centered.
std::vector<Interval> free_centers(const Scene& scene, std::size_t wall, double extent,
                                   const std::vector<MtsPose>& occupied) {
  const double len = scene.walls()[wall].length();
  std::vector<Interval> out;
  for (const auto& f : scene.feasible()) {
    if (f.wall != wall) continue;
    std::vector<Interval> pieces{{f.t0 * len + 0.5 * extent, f.t1 * len - 0.5 * extent}};
    if (pieces[0].lo > pieces[0].hi + 1e-12) continue;
    pieces[0].hi = std::max(pieces[0].hi, pieces[0].lo);
    for (const auto& o : occupied) {
      if (o.wall != wall) continue;
      const double center = o.t * len;
      const double half = 0.5 * (o.extent + extent);
      std::vector<Interval> next;
      for (const auto& p : pieces) {
        if (p.hi <= center - half || p.lo >= center + half) {
          next.push_back(p);
          continue;
        }
        if (p.lo <= center - half) next.push_back({p.lo, center - half});
        if (p.hi >= center + half) next.push_back({center + half, p.hi});
      }
      pieces = std::move(next);
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

struct Spot {
  std::size_t wall;
  double arc;
  double dist;
};

std::optional<Spot> nearest_free_spot(const Scene& scene, const std::vector<std::size_t>& walls,
                                      const Vec2& p, double extent,
                                      const std::vector<MtsPose>& occupied) {
  std::optional<Spot> best;
  for (std::size_t w : walls) {
    const Wall& wall = scene.walls()[w];
    const Vec2 u = wall.tangent();
    const double arc_p = dot(p - wall.a, u);
    const double off = std::abs(cross(u, p - wall.a));
    for (const auto& iv : free_centers(scene, w, extent, occupied)) {
      const double arc = std::clamp(arc_p, iv.lo, iv.hi);
      const double d = std::hypot(off, arc - arc_p);
      bool take = !best || d < best->dist - 1e-12;
      if (!take && std::abs(d - best->dist) <= 1e-12)
        take = w < best->wall || (w == best->wall && arc < best->arc);
      if (take) best = Spot{w, arc, d};
    }
  }
  return best;
}

MtsPose make_pose(const Scene& scene, std::size_t w, double arc, const Vec2& ap, double extent) {
  const Wall& wall = scene.walls()[w];
  const Vec2 tangent = wall.tangent();
  Vec2 normal = perp(tangent);
  if (dot(ap - wall.a, normal) < 0.0) normal = normal * -1.0;
  const double t = arc / wall.length();
  return MtsPose{wall.point_at(t), w, t, tangent, normal, extent};
}

}  // namespace

MtsPose place_for_cluster(const Scene& scene, const Vec2& ap, const Vec2& centroid,
                          const MtsSpec& spec, const std::vector<MtsPose>& occupied) {
  std::set<std::size_t> feasible_walls;
  for (const auto& f : scene.feasible()) feasible_walls.insert(f.wall);

  std::vector<std::size_t> serving;  // AP and centroid strictly on the same side
  std::vector<std::size_t> visible;  // AP strictly off the wall line
  for (std::size_t w : feasible_walls) {
    const Wall& wall = scene.walls()[w];
    const int s_ap = side_of_line(wall.a, wall.b, ap);
    if (s_ap == 0) continue;
    visible.push_back(w);
    if (s_ap == side_of_line(wall.a, wall.b, centroid)) serving.push_back(w);
  }

  // Specular candidates on wall segments; LOS to both ends first, then path length.
  struct Candidate {
    Vec2 point;
    std::size_t wall;
    bool los;
    double path;
  };
  std::optional<Candidate> best;
  std::optional<Candidate> best_on_line;
  for (std::size_t w : serving) {
    const Wall& wall = scene.walls()[w];
    const Vec2 image = reflect_across_line(ap, wall.a, wall.b);
    const auto hit = intersect_lines(image, centroid, wall.a, wall.b);
    if (!hit) continue;
    const Vec2 on_line = wall.a + (wall.b - wall.a) * hit->t;
    const double path = distance(ap, on_line) + distance(on_line, centroid);
    if (!best_on_line || path < best_on_line->path) best_on_line = Candidate{on_line, w, false, path};
    const auto sp = specular_point(scene, w, ap, centroid);
    if (!sp) continue;
    const bool los = los_clear(scene, ap, *sp) && los_clear(scene, *sp, centroid);
    Candidate c{*sp, w, los, path};
    if (!best || (c.los && !best->los) || (c.los == best->los && c.path < best->path)) best = c;
  }
  Vec2 target = centroid;
  if (best) target = best->point;
  else if (best_on_line) target = best_on_line->point;

  const double extent = spec.extent();
  auto spot = nearest_free_spot(scene, serving, target, extent, occupied);
  if (!spot) spot = nearest_free_spot(scene, visible, target, extent, occupied);
  if (!spot) throw NoRoomError("no feasible interval has room for another panel");
  return make_pose(scene, spot->wall, spot->arc, ap, extent);
}

PhaseVector virtual_phases(const Scene& scene, const DeploymentPlan& plan) {
  const MtsSpec& spec = plan.spec;
  const double kappa = atom_coupling(spec, scene.wavelength());
  PhaseVector phases(plan.total_atoms());
  for (std::size_t m = 0; m < plan.panels.size(); ++m) {
    const auto& panel = plan.panels[m];
    const auto a = panel_illumination(scene, panel.pose, spec);
    const TraceConstraints constraints{panel.pose.wall, panel.pose.normal};
    for (int c = 0; c < spec.cols; ++c) {
      const Complex b =
          kappa * path_sum(scene, panel.pose.column_position(c, spec), panel.beam_target, constraints);
      // π is closer to -arg(ab) exactly when Re(ab) < 0.
      const std::uint8_t bit = (a[c] * b).real() < 0.0 ? 1 : 0;
      for (int r = 0; r < spec.rows; ++r) phases.bits[m * spec.atoms() + r * spec.cols + c] = bit;
    }
  }
  return phases;
}

Heatmap virtual_heatmap(const Scene& scene, const DeploymentPlan& plan, const GridMap& grid,
                        const ComputeOptions& opts) {
  return rss_map_with_panels(scene, plan, virtual_phases(scene, plan), grid, opts);
}

std::string to_string(DeployStatus status) {
  switch (status) {
    case DeployStatus::Cleared: return "cleared";
    case DeployStatus::MaxReached: return "max_reached";
    case DeployStatus::NoRoom: return "no_room";
  }
  return "unknown";
}

int initial_mts_count(std::size_t blind, int capacity) {
  if (capacity < 1) throw ValidationError("cluster capacity must be at least 1");
  return static_cast<int>((blind + capacity - 1) / capacity);
}

namespace {

// Union of two row-major cell lists, kept in row-major order.
BlindSpotSet merge_targets(const BlindSpotSet& a, const BlindSpotSet& b, const GridMap& grid) {
  std::set<std::size_t> cells;
  for (const auto& c : a.cells) cells.insert(grid.linear(c));
  for (const auto& c : b.cells) cells.insert(grid.linear(c));
  BlindSpotSet out{{}, a.threshold_dbm, {}};
  for (std::size_t k : cells) {
    out.cells.push_back(grid.cell(k));
    out.positions.push_back(grid.center(grid.cell(k)));
  }
  return out;
}

DeploymentPlan place_clusters(const Scene& scene, const BlindSpotSet& targets,
                              const Clustering& clustering, const MtsSpec& spec) {
  const auto sizes = clustering.sizes();
  std::vector<int> order(clustering.clusters);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[a] > sizes[b]; });

  DeploymentPlan plan{spec, {}};
  std::vector<MtsPose> occupied;
  for (int k : order) {
    if (sizes[k] == 0) continue;
    const Vec2 centroid = clustering.centroids[k];
    MtsPose pose = place_for_cluster(scene, scene.ap().position, centroid, spec, occupied);
    occupied.push_back(pose);
    std::vector<CellIndex> members;
    for (std::size_t p : clustering.members(k)) members.push_back(targets.cells[p]);
    plan.panels.push_back({pose, k, centroid, std::move(members)});
  }
  return plan;
}

}  // namespace

GreedyResult greedy_deploy(const Scene& scene, const GridMap& grid, const DeployOptions& options) {
  GreedyResult result{DeploymentPlan{options.spec, {}},
                      direct_rss_map(scene, grid, options.compute),
                      {},
                      {},
                      {},
                      std::nullopt,
                      {}};
  result.initial = sense(result.direct, options.delta_dbm);
  result.virtual_map = result.direct;
  result.remaining = result.initial;
  const std::size_t blind = result.initial.size();
  result.initial_clusters = initial_mts_count(blind, options.capacity);
  result.max_clusters = 4 * result.initial_clusters + 4;
  if (blind == 0) {
    result.status = DeployStatus::Cleared;
    return result;
  }

  BlindSpotSet targets = result.initial;
  int clusters = result.initial_clusters;
  while (true) {
    clusters = std::max(clusters, initial_mts_count(targets.size(), options.capacity));
    if (clusters > result.max_clusters) {
      result.status = DeployStatus::MaxReached;
      break;
    }
    Clustering clustering =
        capacity_kmeans(targets.positions, clusters, options.capacity, options.seed);
    DeploymentPlan plan;
    try {
      plan = place_clusters(scene, targets, clustering, options.spec);
    } catch (const NoRoomError&) {
      result.status = DeployStatus::NoRoom;
      break;
    }
    result.plan = std::move(plan);
    result.clustering = std::move(clustering);
    result.virtual_map = virtual_heatmap(scene, result.plan, grid, options.compute);
    result.remaining = sense(result.virtual_map, options.delta_dbm);
    result.trace.push_back({clusters, targets.size(), result.remaining.size()});
    if (result.remaining.empty()) {
      result.status = DeployStatus::Cleared;
      break;
    }
    if (clusters >= result.max_clusters) {
      result.status = DeployStatus::MaxReached;
      break;
    }
    ++clusters;
    targets = merge_targets(result.initial, result.remaining, grid);
  }
  return result;
}

}  // namespace mtsplan
