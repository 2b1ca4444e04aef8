#include "mtsplan/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtsplan/error.hpp"

namespace mtsplan {

std::string to_string(FallbackMode mode) {
  switch (mode) {
    case FallbackMode::Normal: return "normal";
    case FallbackMode::PhaseReopt: return "phase_reopt";
    case FallbackMode::RecaptureAlert: return "recapture_alert";
  }
  return "unknown";
}

std::string to_string(MonitorAction action) {
  switch (action) {
    case MonitorAction::None: return "none";
    case MonitorAction::TriggerCsm: return "trigger_csm";
    case MonitorAction::AlertOperator: return "alert_operator";
  }
  return "unknown";
}

FallbackMode parse_fallback_mode(const std::string& text) {
  for (auto m : {FallbackMode::Normal, FallbackMode::PhaseReopt, FallbackMode::RecaptureAlert})
    if (to_string(m) == text) return m;
  throw ParseError("unknown fallback mode '" + text + "'");
}

MonitorAction parse_monitor_action(const std::string& text) {
  for (auto a : {MonitorAction::None, MonitorAction::TriggerCsm, MonitorAction::AlertOperator})
    if (to_string(a) == text) return a;
  throw ParseError("unknown monitor action '" + text + "'");
}

MonitorStep monitor_step(const FallbackState& state, std::span<const double> per_user_rss_dbm,
                         double delta_dbm, int patience) {
  if (per_user_rss_dbm.empty()) throw ValidationError("monitoring needs at least one user");
  if (patience < 1) throw ValidationError("patience must be at least 1");
  if (state.mode == FallbackMode::RecaptureAlert) return {state, MonitorAction::None};
  const double worst = *std::min_element(per_user_rss_dbm.begin(), per_user_rss_dbm.end());
  if (worst >= delta_dbm) return {{FallbackMode::Normal, 0}, MonitorAction::None};
  if (state.mode == FallbackMode::Normal)
    return {{FallbackMode::PhaseReopt, 0}, MonitorAction::TriggerCsm};
  const int below = state.consecutive_below + 1;
  if (below >= patience)
    return {{FallbackMode::RecaptureAlert, below}, MonitorAction::AlertOperator};
  return {{FallbackMode::PhaseReopt, below}, MonitorAction::TriggerCsm};
}

PhaseOutcome optimize_phases(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                             std::uint64_t seed, const PhaseVector& baseline,
                             const std::vector<std::vector<std::size_t>>& voters_per_panel,
                             std::size_t atoms_per_panel) {
  if (oracle.users() == 0) throw ValidationError("phase optimization needs at least one user");
  if (baseline.size() != n_atoms) throw std::invalid_argument("baseline length mismatch");
  PhaseOutcome out;
  out.log = collect_samples(oracle, draw_samples(n_atoms, T, seed));

  std::vector<PhaseVector> votes;
  votes.reserve(oracle.users());
  for (std::size_t u = 0; u < oracle.users(); ++u) votes.push_back(decide_from_log(out.log, u));

  if (voters_per_panel.empty()) {
    out.voted = majority_vote(votes);
  } else {
    out.voted = PhaseVector(n_atoms);
    for (std::size_t p = 0; p < voters_per_panel.size(); ++p) {
      const std::size_t base = p * atoms_per_panel;
      std::vector<PhaseVector> slice;
      for (std::size_t u : voters_per_panel[p])
        slice.emplace_back(std::vector<std::uint8_t>(votes[u].bits.begin() + base,
                                                     votes[u].bits.begin() + base + atoms_per_panel));
      const auto decided = majority_vote(slice);
      std::copy(decided.bits.begin(), decided.bits.end(), out.voted.bits.begin() + base);
    }
  }

  out.voted_rss_mw = oracle.evaluate(out.voted);
  out.baseline_rss_mw = oracle.evaluate(baseline);
  if (min_user(out.voted_rss_mw) >= min_user(out.baseline_rss_mw)) {
    out.chosen = out.voted;
    out.chosen_rss_mw = out.voted_rss_mw;
    out.source = "csm_vote";
  } else {
    out.chosen = baseline;
    out.chosen_rss_mw = out.baseline_rss_mw;
    out.source = "baseline";
  }
  return out;
}

std::vector<std::vector<std::size_t>> nearest_panel_voters(const DeploymentPlan& plan,
                                                           const std::vector<Vec2>& users) {
  std::vector<std::vector<std::size_t>> groups(plan.panels.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < plan.panels.size(); ++p)
      if (distance(users[u], plan.panels[p].pose.center) <
          distance(users[u], plan.panels[best].pose.center))
        best = p;
    if (!plan.panels.empty()) groups[best].push_back(u);
  }
  for (auto& g : groups) {
    if (g.empty()) {
      for (std::size_t u = 0; u < users.size(); ++u) g.push_back(u);
    }
  }
  return groups;
}

std::vector<CdfPoint> rss_cdf(const Heatmap& map) {
  std::vector<double> values;
  for (std::size_t k = 0; k < map.rss_dbm.size(); ++k)
    if (!(map.excluded && *map.excluded == k)) values.push_back(emitted_dbm(map.rss_dbm[k]));
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    cdf.push_back({values[k], static_cast<double>(k + 1) / static_cast<double>(values.size())});
  return cdf;
}

double min_over_cells(const Heatmap& map, const std::vector<CellIndex>& cells) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) m = std::min(m, map.at(c));
  return m;
}

namespace {

// Close to the AP a short strip shadows a wide fan of directions.
constexpr double kPerturbOffset = 0.5;
constexpr double kPerturbLength = 4.0;

template <class Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const ParseError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

std::vector<double> to_dbm(const std::vector<double>& mw) {
  std::vector<double> out;
  out.reserve(mw.size());
  for (double v : mw) out.push_back(mw_to_dbm(v));
  return out;
}

std::vector<Vec2> evaluation_users(const RunConfig& config, const GridMap& grid,
                                   const std::vector<CellIndex>& former_blind) {
  if (!config.users.empty()) return config.users;
  std::vector<Vec2> users;
  for (const auto& c : former_blind) users.push_back(grid.center(c));
  return users;
}

DeployOptions deploy_options(const RunConfig& config) {
  return DeployOptions{config.delta_dbm, config.capacity, config.spec, config.seed,
                       ComputeOptions{config.threads}};
}

Wall default_perturbation(const Scene& scene, const DeploymentPlan& plan,
                          const std::vector<Vec2>& users) {
  const Vec2 ap = scene.ap().position;
  Vec2 toward{0.0, 0.0};
  if (plan.panels.empty()) {
    toward = users.front();
  } else {
    for (const auto& p : plan.panels) toward = toward + p.pose.center;
    toward = toward * (1.0 / static_cast<double>(plan.panels.size()));
  }
  const Vec2 dir = normalized(toward - ap);
  const Vec2 mid = ap + dir * kPerturbOffset;
  const Vec2 across = perp(dir) * (0.5 * kPerturbLength);
  return Wall{mid - across, mid + across, builtin_materials().at("metal")};
}

}  // namespace

GreedyResult plan_deployment(const Scene& scene, const RunConfig& config) {
  const GridMap grid = make_grid(scene, config.cell_size);
  return greedy_deploy(scene, grid, deploy_options(config));
}

void optimize_deployment(const Scene& scene, const DeploymentPlan& plan,
                         const std::vector<CellIndex>& former_blind, const RunConfig& config,
                         DeploymentReport& report) {
  const GridMap& grid = report.grid;
  report.users = evaluation_users(config, grid, former_blind);
  const std::size_t n_atoms = plan.total_atoms();
  const PhaseVector zero(n_atoms);
  report.phases = zero;
  report.phase_source = "baseline";

  if (!report.users.empty()) {
    const auto oracle = SimulationOracle::from_plan(scene, plan, report.users);
    report.user_rss_zero_dbm = to_dbm(oracle.evaluate(zero));
    if (n_atoms > 0) {
      std::vector<std::vector<std::size_t>> voters;
      if (config.nearest_association) voters = nearest_panel_voters(plan, report.users);
      const auto outcome = optimize_phases(oracle, n_atoms, config.samples, config.seed, zero,
                                           voters, plan.spec.atoms());
      report.phases = outcome.chosen;
      report.phase_source = outcome.source;
      report.user_rss_dbm = to_dbm(outcome.chosen_rss_mw);
      report.sample_log = outcome.log;
    } else {
      report.user_rss_dbm = report.user_rss_zero_dbm;
    }
  }

  report.after = rss_map_with_panels(scene, plan, report.phases, grid, {config.threads});
  report.blind_after = sense(report.after, config.delta_dbm).size();
  report.former_blind_min_after_dbm = min_over_cells(report.after, former_blind);
}

std::vector<MonitorEpochReport> simulate_monitoring(const Scene& scene, const DeploymentPlan& plan,
                                                    const std::vector<Vec2>& users,
                                                    PhaseVector phases, const RunConfig& config) {
  std::vector<MonitorEpochReport> out;
  if (config.monitor_epochs <= 0) return out;
  if (users.empty()) throw ValidationError("monitoring needs at least one user position");

  std::optional<Scene> perturbed;
  if (config.perturb_epoch)
    perturbed = scene.with_extra_wall(config.perturb_wall.value_or(
        default_perturbation(scene, plan, users)));

  const std::size_t n_atoms = plan.total_atoms();
  FallbackState state;
  for (int e = 0; e < config.monitor_epochs; ++e) {
    const bool active = perturbed && e >= *config.perturb_epoch;
    const Scene& world = active ? *perturbed : scene;
    const auto oracle = SimulationOracle::from_plan(world, plan, users);
    const auto rss = to_dbm(oracle.evaluate(phases));
    const auto step = monitor_step(state, rss, config.delta_dbm, config.patience);
    state = step.state;
    out.push_back({e, rss, *std::min_element(rss.begin(), rss.end()), state.mode, step.action,
                   active});
    if (step.action == MonitorAction::TriggerCsm && n_atoms > 0) {
      std::vector<std::vector<std::size_t>> voters;
      if (config.nearest_association) voters = nearest_panel_voters(plan, users);
      phases = optimize_phases(oracle, n_atoms, config.samples,
                               config.seed + static_cast<std::uint64_t>(e) + 1, phases, voters,
                               plan.spec.atoms())
                   .chosen;
    }
  }
  return out;
}

DeploymentReport run_pipeline(const Scene& scene, const std::string& scene_name,
                              const RunConfig& config) {
  DeploymentReport report;
  report.scene_name = scene_name;
  report.config = config;
  report.grid = in_stage("make_grid", [&] { return make_grid(scene, config.cell_size); });

  auto greedy = in_stage("greedy_deploy",
                         [&] { return greedy_deploy(scene, report.grid, deploy_options(config)); });
  report.before = greedy.direct;
  report.planned = greedy.virtual_map;
  report.status = greedy.status;
  report.initial_mts = greedy.initial_clusters;
  report.max_mts = greedy.max_clusters;
  report.greedy_trace = greedy.trace;
  report.plan = greedy.plan;
  report.initial_blind = greedy.initial.cells;
  report.blind_before = greedy.initial.size();
  report.blind_planned = greedy.remaining.size();
  report.former_blind_min_planned_dbm = min_over_cells(greedy.virtual_map, greedy.initial.cells);
  for (const auto& panel : greedy.plan.panels)
    report.clusters.push_back({panel.cluster, panel.beam_target, panel.members});

  in_stage("csm", [&] {
    optimize_deployment(scene, report.plan, report.initial_blind, config, report);
    return 0;
  });
  report.cdf = rss_cdf(report.after);
  report.monitor = in_stage("monitor", [&] {
    return simulate_monitoring(scene, report.plan, report.users, report.phases, config);
  });
  return report;
}

DeploymentReport run_pipeline(const std::filesystem::path& scene_path, const RunConfig& config) {
  const Scene scene = in_stage("load_scene", [&] { return load_scene(scene_path); });
  return run_pipeline(scene, scene_path.stem().string(), config);
}

}  // namespace mtsplan
