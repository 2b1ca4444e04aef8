#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtsplan/controller.hpp"

namespace mtsplan {

/// Report and plan JSON. The schema is described in docs/report-schema.md. Heatmaps and
/// the CDF are not embedded; `files` names their sibling CSVs.
nlohmann::json plan_to_json(const DeploymentPlan& plan);
DeploymentPlan plan_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const GridMap& grid);
GridMap grid_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const DeploymentReport& report);
DeploymentReport report_from_json(const nlohmann::json& j);

/// `i,j,x,y,rss_dbm`, row-major, six decimals, -inf written as -999.
void write_heatmap_csv(std::ostream& out, const Heatmap& map);
/// `rss_dbm,fraction`
void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf);
/// `i,j,x,y,rss_dbm` for each listed cell.
void write_cells_csv(std::ostream& out, const Heatmap& map, const std::vector<CellIndex>& cells);

struct BenchmarkRow {
  std::string method;
  double min_user_rss_dbm;
  double mean_rss_dbm;  ///< 10·log10 of the mean linear power over users
};

/// Zero phase, one random draw, best-of-T sampling, raw CSM vote, safety-netted CSM and,
/// for at most 20 atoms, exhaustive search.
std::vector<BenchmarkRow> benchmark_methods(const RssOracle& oracle, std::size_t n_atoms,
                                            std::size_t T, std::uint64_t seed);
/// `method,min_user_rss_dbm,mean_rss_dbm`
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace mtsplan
