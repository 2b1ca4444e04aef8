#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtsplan/blindspot.hpp"
#include "mtsplan/csm.hpp"
#include "mtsplan/placement.hpp"
#include "mtsplan/scene.hpp"

namespace mtsplan {

enum class FallbackMode { Normal, PhaseReopt, RecaptureAlert };
enum class MonitorAction { None, TriggerCsm, AlertOperator };

std::string to_string(FallbackMode mode);
std::string to_string(MonitorAction action);
FallbackMode parse_fallback_mode(const std::string& text);
MonitorAction parse_monitor_action(const std::string& text);

struct FallbackState {
  FallbackMode mode = FallbackMode::Normal;
  int consecutive_below = 0;  ///< below-threshold epochs seen while in PhaseReopt
};

struct MonitorStep {
  FallbackState state;
  MonitorAction action;
};

/// One monitoring epoch of the two-level fallback:
///  - worst user >= delta: back to Normal, counter cleared;
///  - worst user < delta from Normal: PhaseReopt and re-run CSM;
///  - worst user < delta in PhaseReopt: count it; at `patience` escalate to RecaptureAlert;
///  - RecaptureAlert stays put until reset_fallback().
/// Throws ValidationError on an empty user list or patience < 1.
MonitorStep monitor_step(const FallbackState& state, std::span<const double> per_user_rss_dbm,
                         double delta_dbm, int patience);

/// External operator reset after a recapture.
inline FallbackState reset_fallback() { return {}; }

struct RunConfig {
  double cell_size = 1.0;
  double delta_dbm = -78.0;
  int capacity = 6;
  MtsSpec spec;
  std::size_t samples = 1000;  ///< T
  std::uint64_t seed = 1;
  /// Evaluation positions; empty means the centers of the initial blind spots.
  std::vector<Vec2> users;
  /// Each user votes only on the panel nearest to it.
  bool nearest_association = false;
  int patience = 3;
  unsigned threads = 0;
  int monitor_epochs = 0;
  std::optional<int> perturb_epoch;
  /// Occluder toggled on from perturb_epoch; defaults to a 4 m metal strip 0.5 m from the AP,
  /// across the direction of the mean panel center.
  std::optional<Wall> perturb_wall;
};

struct PhaseOutcome {
  PhaseVector voted;
  PhaseVector chosen;
  std::string source;  ///< "csm_vote" or "baseline"
  std::vector<double> voted_rss_mw;
  std::vector<double> baseline_rss_mw;
  std::vector<double> chosen_rss_mw;
  SampleLog log;
};

/// Shared-sample CSM for every user, per-atom majority vote, then the safety net: the
/// vote is kept only if its worst-user RSS is at least that of `baseline`.
/// `voters_per_panel` (optional) restricts which users vote on each panel's atoms.
PhaseOutcome optimize_phases(const RssOracle& oracle, std::size_t n_atoms, std::size_t T,
                             std::uint64_t seed, const PhaseVector& baseline,
                             const std::vector<std::vector<std::size_t>>& voters_per_panel = {},
                             std::size_t atoms_per_panel = 0);

/// Users grouped by nearest panel center (empty groups fall back to all users).
std::vector<std::vector<std::size_t>> nearest_panel_voters(const DeploymentPlan& plan,
                                                           const std::vector<Vec2>& users);

struct MonitorEpochReport {
  int epoch;
  std::vector<double> rss_dbm;
  double min_rss_dbm;
  FallbackMode mode;
  MonitorAction action;
  bool perturbed;
};

struct ClusterReport {
  int cluster;
  Vec2 centroid;
  std::vector<CellIndex> members;
};

struct CdfPoint {
  double rss_dbm;
  double fraction;
};

struct DeploymentReport {
  std::string scene_name;
  RunConfig config;
  GridMap grid;
  Heatmap before;
  Heatmap planned;  ///< virtual deployment under the beam-toward-centroid phases
  Heatmap after;    ///< final phases

  DeployStatus status = DeployStatus::Cleared;
  int initial_mts = 0;
  int max_mts = 0;
  std::vector<GreedyIteration> greedy_trace;
  std::vector<ClusterReport> clusters;
  DeploymentPlan plan;

  std::vector<Vec2> users;
  PhaseVector phases;
  std::string phase_source;
  std::vector<double> user_rss_dbm;       ///< final phases
  std::vector<double> user_rss_zero_dbm;  ///< all-zero phases

  std::vector<CellIndex> initial_blind;
  std::size_t blind_before = 0;
  std::size_t blind_planned = 0;
  std::size_t blind_after = 0;
  double former_blind_min_planned_dbm = 0.0;
  double former_blind_min_after_dbm = 0.0;

  std::vector<CdfPoint> cdf;
  std::vector<MonitorEpochReport> monitor;
  std::map<std::string, std::string> files;  ///< sibling outputs, keyed by role
  SampleLog sample_log;                      ///< CSM samples (not part of the JSON)
};

/// Empirical CDF over the non-excluded cells of a heatmap (-inf emitted as the sentinel).
std::vector<CdfPoint> rss_cdf(const Heatmap& map);

/// Minimum RSS over the listed cells; +inf for an empty list.
double min_over_cells(const Heatmap& map, const std::vector<CellIndex>& cells);

/// Deployment stage only: scene -> grid -> direct map -> sense -> greedy_deploy.
GreedyResult plan_deployment(const Scene& scene, const RunConfig& config);

/// Phase stage and final evaluation on an existing plan; fills the phase, user and
/// after-map fields of `report`.
void optimize_deployment(const Scene& scene, const DeploymentPlan& plan,
                         const std::vector<CellIndex>& former_blind, const RunConfig& config,
                         DeploymentReport& report);

/// Epoch-by-epoch fallback simulation with the optional scripted occluder.
std::vector<MonitorEpochReport> simulate_monitoring(const Scene& scene, const DeploymentPlan& plan,
                                                    const std::vector<Vec2>& users,
                                                    PhaseVector phases, const RunConfig& config);

/// Full closed loop; every stage failure is rethrown as StageError tagged with its stage.
DeploymentReport run_pipeline(const std::filesystem::path& scene_path, const RunConfig& config);
DeploymentReport run_pipeline(const Scene& scene, const std::string& scene_name,
                              const RunConfig& config);

}  // namespace mtsplan
