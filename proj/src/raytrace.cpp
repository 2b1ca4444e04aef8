#include "mtsplan/raytrace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mtsplan/error.hpp"

namespace mtsplan {

Complex free_space_gain(double length, double wavelength) {
  const double amplitude = wavelength / (4.0 * kPi * std::max(length, kNearFieldClamp));
  return std::polar(amplitude, -2.0 * kPi * length / wavelength);
}

namespace {

bool blocked_by(const Vec2& p, const Vec2& q, const Wall& wall) {
  const double len = distance(p, q);
  const double s_lo = kGeomEps / len;
  const double s_hi = 1.0 - kGeomEps / len;
  const auto hit = intersect_lines(p, q, wall.a, wall.b);
  if (!hit) {
    if (std::abs(signed_distance(p, q, wall.a)) > kGeomEps) return false;
    // Collinear: occluded if the wall overlaps the open segment anywhere.
    const Vec2 d = q - p;
    const double sa = dot(wall.a - p, d) / dot(d, d);
    const double sb = dot(wall.b - p, d) / dot(d, d);
    return std::max(sa, sb) >= s_lo && std::min(sa, sb) <= s_hi;
  }
  const double t_pad = kGeomEps / wall.length();
  return hit->s > s_lo && hit->s < s_hi && hit->t >= -t_pad && hit->t <= 1.0 + t_pad;
}

bool heads_front(const Vec2& from, const Vec2& to, const std::optional<Vec2>& normal) {
  return !normal || dot(to - from, *normal) > kGeomEps;
}

}  // namespace

bool los_clear(const Scene& scene, const Vec2& p, const Vec2& q) {
  for (const auto& wall : scene.walls())
    if (blocked_by(p, q, wall)) return false;
  return true;
}

std::vector<Path> trace_paths(const Scene& scene, const Vec2& tx, const Vec2& rx, int max_order,
                              const TraceConstraints& constraints) {
  if (max_order < 0 || max_order > 1)
    throw std::invalid_argument("trace_paths supports reflection order 0 or 1");
  const double lambda = scene.wavelength();
  std::vector<Path> paths;

  const double d = distance(tx, rx);
  if (d < kGeomEps) {
    paths.push_back({{tx, rx}, free_space_gain(d, lambda), d, std::nullopt});
  } else if (heads_front(tx, rx, constraints.tx_front_normal) && los_clear(scene, tx, rx)) {
    paths.push_back({{tx, rx}, free_space_gain(d, lambda), d, std::nullopt});
  }
  if (max_order == 0) return paths;

  const auto& walls = scene.walls();
  for (std::size_t w = 0; w < walls.size(); ++w) {
    if (constraints.skip_reflection_wall && *constraints.skip_reflection_wall == w) continue;
    const Wall& wall = walls[w];
    const int side_tx = side_of_line(wall.a, wall.b, tx);
    if (side_tx == 0 || side_tx != side_of_line(wall.a, wall.b, rx)) continue;
    const Vec2 image = reflect_across_line(tx, wall.a, wall.b);
    const auto hit = intersect_lines(image, rx, wall.a, wall.b);
    if (!hit) continue;
    // Reflection points at (or within eps of) a wall endpoint are rejected.
    const double t_pad = kGeomEps / wall.length();
    if (!(hit->t > t_pad && hit->t < 1.0 - t_pad)) continue;
    const Vec2 r = wall.point_at(hit->t);
    const double d1 = distance(tx, r);
    const double d2 = distance(r, rx);
    if (d1 < kGeomEps || d2 < kGeomEps) continue;
    if (!heads_front(tx, r, constraints.tx_front_normal)) continue;
    if (!los_clear(scene, tx, r) || !los_clear(scene, r, rx)) continue;
    const double length = d1 + d2;
    paths.push_back({{tx, r, rx},
                     free_space_gain(length, lambda) * wall.material.reflection_coefficient,
                     length,
                     w});
  }
  return paths;
}

Complex path_sum(const Scene& scene, const Vec2& tx, const Vec2& rx,
                 const TraceConstraints& constraints) {
  Complex sum{0.0, 0.0};
  for (const auto& p : trace_paths(scene, tx, rx, 1, constraints)) sum += p.gain;
  return sum;
}

double field_to_dbm(Complex field, double tx_power_dbm) {
  const double mag = std::abs(field);
  if (mag == 0.0) return -std::numeric_limits<double>::infinity();
  return tx_power_dbm + 20.0 * std::log10(mag);
}

double dbm_to_mw(double dbm) { return std::isinf(dbm) && dbm < 0 ? 0.0 : std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) {
  if (mw <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(mw);
}

double emitted_dbm(double dbm) { return std::isfinite(dbm) ? dbm : kNoSignalDbm; }

void parallel_for_cells(std::size_t count, unsigned threads,
                        const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            fn(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

Heatmap direct_rss_map(const Scene& scene, const GridMap& grid, const ComputeOptions& opts) {
  Heatmap map{grid, std::vector<double>(grid.cell_count()), std::nullopt};
  const Vec2 ap = scene.ap().position;
  const double power = scene.ap().tx_power_dbm;
  parallel_for_cells(grid.cell_count(), opts.threads, [&](std::size_t k) {
    map.rss_dbm[k] = field_to_dbm(path_sum(scene, ap, grid.center(grid.cell(k))), power);
  });
  if (auto c = grid.locate(ap)) map.excluded = grid.linear(*c);
  return map;
}

double atom_coupling(const MtsSpec& spec, double wavelength) {
  return spec.kappa.value_or(std::sqrt(4.0 * kPi) * spec.spacing / wavelength);
}

namespace {

void check_pose(const Scene& scene, const MtsPose& pose) {
  if (pose.wall >= scene.walls().size()) throw ValidationError("pose references a missing wall");
  const double half = 0.5 * pose.extent / scene.walls()[pose.wall].length();
  constexpr double tol = 1e-9;
  for (const auto& f : scene.feasible()) {
    if (f.wall == pose.wall && pose.t - half >= f.t0 - tol && pose.t + half <= f.t1 + tol) return;
  }
  throw ValidationError("panel on wall " + std::to_string(pose.wall) +
                        " lies outside every feasible interval");
}

TraceConstraints panel_constraints(const MtsPose& pose) {
  return TraceConstraints{pose.wall, pose.normal};
}

}  // namespace

std::vector<Complex> panel_illumination(const Scene& scene, const MtsPose& pose,
                                        const MtsSpec& spec) {
  const double kappa = atom_coupling(spec, scene.wavelength());
  std::vector<Complex> a(spec.cols);
  for (int c = 0; c < spec.cols; ++c)
    a[c] = kappa * path_sum(scene, pose.column_position(c, spec), scene.ap().position,
                            panel_constraints(pose));
  return a;
}

ChannelSet cascaded_channels(const Scene& scene, const DeploymentPlan& plan, const Vec2& rx) {
  const MtsSpec& spec = plan.spec;
  const double kappa = atom_coupling(spec, scene.wavelength());
  ChannelSet set;
  set.direct = path_sum(scene, scene.ap().position, rx);
  set.cascaded.reserve(plan.total_atoms());
  for (const auto& panel : plan.panels) {
    check_pose(scene, panel.pose);
    const auto a = panel_illumination(scene, panel.pose, spec);
    std::vector<Complex> b(spec.cols);
    for (int c = 0; c < spec.cols; ++c)
      b[c] = kappa * path_sum(scene, panel.pose.column_position(c, spec), rx,
                              panel_constraints(panel.pose));
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) set.cascaded.push_back({a[c], b[c]});
  }
  return set;
}

double combined_rss(const ChannelSet& channels, const PhaseVector& phases, double tx_power_dbm) {
  if (phases.size() != channels.cascaded.size())
    throw std::invalid_argument("phase vector length " + std::to_string(phases.size()) +
                                " does not match " + std::to_string(channels.cascaded.size()) +
                                " cascaded channels");
  Complex field = channels.direct;
  for (std::size_t n = 0; n < phases.size(); ++n) {
    const Complex term = channels.cascaded[n].ap_to_atom * channels.cascaded[n].atom_to_rx;
    field += phases.bits[n] ? -term : term;
  }
  return field_to_dbm(field, tx_power_dbm);
}

Heatmap rss_map_with_panels(const Scene& scene, const DeploymentPlan& plan,
                            const PhaseVector& phases, const GridMap& grid,
                            const ComputeOptions& opts) {
  const MtsSpec& spec = plan.spec;
  if (phases.size() != plan.total_atoms())
    throw std::invalid_argument("phase vector length does not match the plan's atom count");
  const double kappa = atom_coupling(spec, scene.wavelength());

  // Rows share a plan-view position, so each column reduces to a_c times a signed row count.
  struct PanelTerms {
    std::vector<Complex> weighted_a;
  };
  std::vector<PanelTerms> terms;
  for (std::size_t m = 0; m < plan.panels.size(); ++m) {
    check_pose(scene, plan.panels[m].pose);
    const auto a = panel_illumination(scene, plan.panels[m].pose, spec);
    PanelTerms t{std::vector<Complex>(spec.cols)};
    const std::size_t base = m * spec.atoms();
    for (int c = 0; c < spec.cols; ++c) {
      int weight = 0;
      for (int r = 0; r < spec.rows; ++r) weight += phases.bits[base + r * spec.cols + c] ? -1 : 1;
      t.weighted_a[c] = a[c] * static_cast<double>(weight);
    }
    terms.push_back(std::move(t));
  }

  Heatmap map{grid, std::vector<double>(grid.cell_count()), std::nullopt};
  const Vec2 ap = scene.ap().position;
  parallel_for_cells(grid.cell_count(), opts.threads, [&](std::size_t k) {
    const Vec2 rx = grid.center(grid.cell(k));
    Complex field = path_sum(scene, ap, rx);
    for (std::size_t m = 0; m < plan.panels.size(); ++m) {
      const MtsPose& pose = plan.panels[m].pose;
      for (int c = 0; c < spec.cols; ++c) {
        if (terms[m].weighted_a[c] == Complex{}) continue;
        field += terms[m].weighted_a[c] * kappa *
                 path_sum(scene, pose.column_position(c, spec), rx, panel_constraints(pose));
      }
    }
    map.rss_dbm[k] = field_to_dbm(field, scene.ap().tx_power_dbm);
  });
  if (auto c = grid.locate(ap)) map.excluded = grid.linear(*c);
  return map;
}

}  // namespace mtsplan
