#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mtsplan/geometry.hpp"
#include "mtsplan/plan.hpp"
#include "mtsplan/scene.hpp"

namespace mtsplan {

using Complex = std::complex<double>;

/// Below this length the free-space amplitude is evaluated at the clamp value.
inline constexpr double kNearFieldClamp = 0.1;

/// RSS sentinel written to files for cells without any propagation path.
inline constexpr double kNoSignalDbm = -999.0;

struct Path {
  std::vector<Vec2> vertices;  ///< tx, [reflection point], rx
  Complex gain;
  double length;
  std::optional<std::size_t> reflection_wall;
};

/// λ/(4π·max(L, clamp)) · e^{-j2πL/λ}
Complex free_space_gain(double length, double wavelength);

/// True iff the open segment (p, q) touches no wall; endpoint grazing occludes.
bool los_clear(const Scene& scene, const Vec2& p, const Vec2& q);

/// Extra constraints used when one path endpoint sits on a mounted panel.
struct TraceConstraints {
  std::optional<std::size_t> skip_reflection_wall;
  /// When set, the first hop leaving tx must head into the open half-plane with this normal.
  std::optional<Vec2> tx_front_normal;
};

/// LOS path (if unoccluded) plus, for max_order = 1, every valid single-bounce path.
std::vector<Path> trace_paths(const Scene& scene, const Vec2& tx, const Vec2& rx, int max_order,
                              const TraceConstraints& constraints = {});

/// Coherent sum of all path gains up to order 1.
Complex path_sum(const Scene& scene, const Vec2& tx, const Vec2& rx,
                 const TraceConstraints& constraints = {});

/// Converts a complex field amplitude to dBm; zero amplitude maps to -inf.
double field_to_dbm(Complex field, double tx_power_dbm);
double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// -inf becomes kNoSignalDbm; finite values pass through.
double emitted_dbm(double dbm);

/// Per-cell predicted RSS on a grid.
struct Heatmap {
  GridMap grid;
  std::vector<double> rss_dbm;          ///< row-major, -inf where no path reaches
  std::optional<std::size_t> excluded;  ///< AP cell, skipped by blind-spot logic

  double at(CellIndex c) const { return rss_dbm[grid.linear(c)]; }
};

struct ComputeOptions {
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// Runs fn(cell) for every linear cell index, partitioned over worker threads.
/// Each index is written by exactly one worker, so output never depends on thread count.
void parallel_for_cells(std::size_t count, unsigned threads,
                        const std::function<void(std::size_t)>& fn);

Heatmap direct_rss_map(const Scene& scene, const GridMap& grid, const ComputeOptions& opts = {});

struct ChannelSet {
  Complex direct;
  struct Pair {
    Complex ap_to_atom;
    Complex atom_to_rx;
  };
  std::vector<Pair> cascaded;
};

/// Direct channel AP->rx plus the (a_n, b_n) pair of every atom of every panel in the plan.
/// Throws ValidationError if a pose is off the feasible region.
ChannelSet cascaded_channels(const Scene& scene, const DeploymentPlan& plan, const Vec2& rx);

/// tx_power + 20·log10|h0 + Σ a_n e^{jθ_n} b_n|.
/// Throws std::invalid_argument on length mismatch.
double combined_rss(const ChannelSet& channels, const PhaseVector& phases, double tx_power_dbm);

/// AP-side amplitudes a_n of one panel, per column (rows share a plan-view position).
std::vector<Complex> panel_illumination(const Scene& scene, const MtsPose& pose,
                                        const MtsSpec& spec);

/// Heatmap of the direct field plus every panel under the given phases.
Heatmap rss_map_with_panels(const Scene& scene, const DeploymentPlan& plan,
                            const PhaseVector& phases, const GridMap& grid,
                            const ComputeOptions& opts = {});

}  // namespace mtsplan
