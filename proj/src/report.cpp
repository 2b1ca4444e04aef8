#include "mtsplan/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mtsplan/error.hpp"

namespace mtsplan {

using nlohmann::json;

namespace {

constexpr const char* kReportSchema = "mtsplan.report/1";

// -inf is written as the no-signal sentinel, +inf (empty minimum) as null.
json level(double dbm) {
  if (std::isnan(dbm) || (std::isinf(dbm) && dbm > 0)) return nullptr;
  return emitted_dbm(dbm);
}

double level_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json levels(const std::vector<double>& v) {
  json out = json::array();
  for (double d : v) out.push_back(level(d));
  return out;
}

std::vector<double> levels_from(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(level_from(e));
  return out;
}

json point(const Vec2& p) { return json::array({p.x, p.y}); }
Vec2 point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json points(const std::vector<Vec2>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back(point(p));
  return out;
}

std::vector<Vec2> points_from(const json& j) {
  std::vector<Vec2> out;
  for (const auto& e : j) out.push_back(point_from(e));
  return out;
}

json cells(const std::vector<CellIndex>& v) {
  json out = json::array();
  for (const auto& c : v) out.push_back(json::array({c.i, c.j}));
  return out;
}

std::vector<CellIndex> cells_from(const json& j) {
  std::vector<CellIndex> out;
  for (const auto& e : j) out.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  return out;
}

json wall_json(const Wall& w) {
  return {{"a", point(w.a)},
          {"b", point(w.b)},
          {"material", w.material.name},
          {"gamma_mag", std::abs(w.material.reflection_coefficient)},
          {"gamma_phase_rad", std::arg(w.material.reflection_coefficient)}};
}

Wall wall_from(const json& j) {
  return {point_from(j.at("a")), point_from(j.at("b")),
          Material{j.at("material").get<std::string>(),
                   std::polar(j.at("gamma_mag").get<double>(),
                              j.at("gamma_phase_rad").get<double>())}};
}

DeployStatus status_from(const std::string& s) {
  for (auto st : {DeployStatus::Cleared, DeployStatus::MaxReached, DeployStatus::NoRoom})
    if (to_string(st) == s) return st;
  throw ParseError("unknown deployment status '" + s + "'");
}

template <class Fn>
auto parsing(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ParseError(std::string("report schema mismatch: ") + e.what());
  }
}

}  // namespace

json plan_to_json(const DeploymentPlan& plan) {
  json mts = {{"rows", plan.spec.rows}, {"cols", plan.spec.cols}, {"spacing", plan.spec.spacing}};
  mts["kappa"] = plan.spec.kappa ? json(*plan.spec.kappa) : json(nullptr);
  json panels = json::array();
  for (const auto& p : plan.panels) {
    panels.push_back({{"wall", p.pose.wall},
                      {"center", point(p.pose.center)},
                      {"t", p.pose.t},
                      {"tangent", point(p.pose.tangent)},
                      {"normal", point(p.pose.normal)},
                      {"extent", p.pose.extent},
                      {"cluster", p.cluster},
                      {"beam_target", point(p.beam_target)},
                      {"members", cells(p.members)}});
  }
  return {{"mts", mts}, {"panels", panels}};
}

DeploymentPlan plan_from_json(const json& j) {
  return parsing([&] {
    DeploymentPlan plan;
    const auto& mts = j.at("mts");
    plan.spec.rows = mts.at("rows").get<int>();
    plan.spec.cols = mts.at("cols").get<int>();
    plan.spec.spacing = mts.at("spacing").get<double>();
    if (mts.contains("kappa") && !mts.at("kappa").is_null())
      plan.spec.kappa = mts.at("kappa").get<double>();
    if (plan.spec.rows < 1 || plan.spec.cols < 1 || !(plan.spec.spacing > 0.0))
      throw ValidationError("panel layout needs rows, cols >= 1 and positive spacing");
    for (const auto& p : j.at("panels")) {
      MtsPose pose{point_from(p.at("center")),     p.at("wall").get<std::size_t>(),
                   p.at("t").get<double>(),        point_from(p.at("tangent")),
                   point_from(p.at("normal")),     p.at("extent").get<double>()};
      plan.panels.push_back({pose, p.at("cluster").get<int>(), point_from(p.at("beam_target")),
                             cells_from(p.at("members"))});
    }
    return plan;
  });
}

json grid_to_json(const GridMap& grid) {
  return {{"origin", point(grid.origin)},
          {"cell_size", grid.cell_size},
          {"nx", grid.nx},
          {"ny", grid.ny}};
}

GridMap grid_from_json(const json& j) {
  return parsing([&] {
    return GridMap{point_from(j.at("origin")), j.at("cell_size").get<double>(),
                   j.at("nx").get<int>(), j.at("ny").get<int>()};
  });
}

json config_to_json(const RunConfig& c) {
  json mts = {{"rows", c.spec.rows}, {"cols", c.spec.cols}, {"spacing", c.spec.spacing}};
  mts["kappa"] = c.spec.kappa ? json(*c.spec.kappa) : json(nullptr);
  return {{"cell_size", c.cell_size},
          {"delta_dbm", c.delta_dbm},
          {"capacity", c.capacity},
          {"mts", mts},
          {"samples", c.samples},
          {"seed", c.seed},
          {"users", points(c.users)},
          {"nearest_association", c.nearest_association},
          {"patience", c.patience},
          {"monitor_epochs", c.monitor_epochs},
          {"perturb_epoch", c.perturb_epoch ? json(*c.perturb_epoch) : json(nullptr)},
          {"perturb_wall", c.perturb_wall ? wall_json(*c.perturb_wall) : json(nullptr)}};
}

RunConfig config_from_json(const json& j) {
  return parsing([&] {
    RunConfig c;
    c.cell_size = j.at("cell_size").get<double>();
    c.delta_dbm = j.at("delta_dbm").get<double>();
    c.capacity = j.at("capacity").get<int>();
    const auto& mts = j.at("mts");
    c.spec.rows = mts.at("rows").get<int>();
    c.spec.cols = mts.at("cols").get<int>();
    c.spec.spacing = mts.at("spacing").get<double>();
    if (!mts.at("kappa").is_null()) c.spec.kappa = mts.at("kappa").get<double>();
    c.samples = j.at("samples").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.users = points_from(j.at("users"));
    c.nearest_association = j.at("nearest_association").get<bool>();
    c.patience = j.at("patience").get<int>();
    c.monitor_epochs = j.at("monitor_epochs").get<int>();
    if (!j.at("perturb_epoch").is_null()) c.perturb_epoch = j.at("perturb_epoch").get<int>();
    if (!j.at("perturb_wall").is_null()) c.perturb_wall = wall_from(j.at("perturb_wall"));
    return c;
  });
}

json report_to_json(const DeploymentReport& r) {
  json trace = json::array();
  for (const auto& it : r.greedy_trace)
    trace.push_back({{"clusters", it.clusters}, {"targets", it.targets}, {"remaining", it.remaining}});
  json clusters = json::array();
  for (const auto& c : r.clusters)
    clusters.push_back(
        {{"cluster", c.cluster}, {"centroid", point(c.centroid)}, {"members", cells(c.members)}});
  json monitor = json::array();
  for (const auto& m : r.monitor)
    monitor.push_back({{"epoch", m.epoch},
                       {"rss_dbm", levels(m.rss_dbm)},
                       {"min_rss_dbm", level(m.min_rss_dbm)},
                       {"mode", to_string(m.mode)},
                       {"action", to_string(m.action)},
                       {"perturbed", m.perturbed}});
  json files = json::object();
  for (const auto& [k, v] : r.files) files[k] = v;

  return {{"schema", kReportSchema},
          {"scene", r.scene_name},
          {"config", config_to_json(r.config)},
          {"grid", grid_to_json(r.grid)},
          {"files", files},
          {"status", to_string(r.status)},
          {"initial_mts", r.initial_mts},
          {"max_mts", r.max_mts},
          {"mts_count", r.plan.mts_count()},
          {"greedy_trace", trace},
          {"clusters", clusters},
          {"plan", plan_to_json(r.plan)},
          {"users", points(r.users)},
          {"phases",
           {{"n_atoms", r.phases.size()}, {"hex", to_hex(r.phases)}, {"source", r.phase_source}}},
          {"user_rss_dbm", levels(r.user_rss_dbm)},
          {"user_rss_zero_dbm", levels(r.user_rss_zero_dbm)},
          {"blind",
           {{"initial_cells", cells(r.initial_blind)},
            {"before", r.blind_before},
            {"planned", r.blind_planned},
            {"after", r.blind_after}}},
          {"former_blind_min_dbm",
           {{"planned", level(r.former_blind_min_planned_dbm)},
            {"after", level(r.former_blind_min_after_dbm)}}},
          {"monitor", monitor}};
}

DeploymentReport report_from_json(const json& j) {
  return parsing([&] {
    if (j.at("schema").get<std::string>() != kReportSchema)
      throw ParseError("unsupported report schema '" + j.at("schema").get<std::string>() + "'");
    DeploymentReport r;
    r.scene_name = j.at("scene").get<std::string>();
    r.config = config_from_json(j.at("config"));
    r.grid = grid_from_json(j.at("grid"));
    for (const auto& [k, v] : j.at("files").items()) r.files[k] = v.get<std::string>();
    r.status = status_from(j.at("status").get<std::string>());
    r.initial_mts = j.at("initial_mts").get<int>();
    r.max_mts = j.at("max_mts").get<int>();
    for (const auto& it : j.at("greedy_trace"))
      r.greedy_trace.push_back({it.at("clusters").get<int>(), it.at("targets").get<std::size_t>(),
                                it.at("remaining").get<std::size_t>()});
    for (const auto& c : j.at("clusters"))
      r.clusters.push_back({c.at("cluster").get<int>(), point_from(c.at("centroid")),
                            cells_from(c.at("members"))});
    r.plan = plan_from_json(j.at("plan"));
    if (j.at("mts_count").get<std::size_t>() != r.plan.mts_count())
      throw ParseError("mts_count disagrees with the plan");
    r.users = points_from(j.at("users"));
    const auto& ph = j.at("phases");
    r.phases = phases_from_hex(ph.at("hex").get<std::string>(), ph.at("n_atoms").get<std::size_t>());
    r.phase_source = ph.at("source").get<std::string>();
    r.user_rss_dbm = levels_from(j.at("user_rss_dbm"));
    r.user_rss_zero_dbm = levels_from(j.at("user_rss_zero_dbm"));
    const auto& blind = j.at("blind");
    r.initial_blind = cells_from(blind.at("initial_cells"));
    r.blind_before = blind.at("before").get<std::size_t>();
    r.blind_planned = blind.at("planned").get<std::size_t>();
    r.blind_after = blind.at("after").get<std::size_t>();
    r.former_blind_min_planned_dbm = level_from(j.at("former_blind_min_dbm").at("planned"));
    r.former_blind_min_after_dbm = level_from(j.at("former_blind_min_dbm").at("after"));
    for (const auto& m : j.at("monitor"))
      r.monitor.push_back({m.at("epoch").get<int>(), levels_from(m.at("rss_dbm")),
                           level_from(m.at("min_rss_dbm")),
                           parse_fallback_mode(m.at("mode").get<std::string>()),
                           parse_monitor_action(m.at("action").get<std::string>()),
                           m.at("perturbed").get<bool>()});
    return r;
  });
}

namespace {

void write_cell_row(std::ostream& out, const Heatmap& map, CellIndex c) {
  const Vec2 p = map.grid.center(c);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f\n", c.i, c.j, p.x, p.y,
                emitted_dbm(map.at(c)));
  out << buf;
}

}  // namespace

void write_heatmap_csv(std::ostream& out, const Heatmap& map) {
  out << "i,j,x,y,rss_dbm\n";
  for (std::size_t k = 0; k < map.grid.cell_count(); ++k) write_cell_row(out, map, map.grid.cell(k));
}

void write_cells_csv(std::ostream& out, const Heatmap& map, const std::vector<CellIndex>& list) {
  out << "i,j,x,y,rss_dbm\n";
  for (const auto& c : list) write_cell_row(out, map, c);
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf) {
  out << "rss_dbm,fraction\n";
  char buf[96];
  for (const auto& p : cdf) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.rss_dbm, p.fraction);
    out << buf;
  }
}

std::vector<BenchmarkRow> benchmark_methods(const RssOracle& oracle, std::size_t n_atoms,
                                            std::size_t T, std::uint64_t seed) {
  std::vector<BenchmarkRow> rows;
  auto row = [&](const std::string& name, const PhaseVector& v) {
    const auto rss = oracle.evaluate(v);
    rows.push_back({name, mw_to_dbm(min_user(rss)), mw_to_dbm(mean_user(rss))});
  };
  const PhaseVector zero(n_atoms);
  row("zero_phase", zero);
  // Offset keeps the single random draw distinct from the first CSM/greedy sample.
  row("random_phase", draw_samples(n_atoms, 1, seed + 0x9e3779b97f4a7c15ULL).front());
  row("greedy", greedy_baseline(oracle, n_atoms, T, seed).best);
  const auto csm = optimize_phases(oracle, n_atoms, T, seed, zero);
  row("csm_vote", csm.voted);
  row("csm", csm.chosen);
  if (n_atoms <= kExhaustiveMaxAtoms) row("exhaustive", exhaustive_solve(oracle, n_atoms));
  return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "method,min_user_rss_dbm,mean_rss_dbm\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", r.method.c_str(),
                  emitted_dbm(r.min_user_rss_dbm), emitted_dbm(r.mean_rss_dbm));
    out << buf;
  }
}

}  // namespace mtsplan
