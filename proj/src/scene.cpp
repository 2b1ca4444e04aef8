#include "mtsplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mtsplan/error.hpp"

namespace mtsplan {

using nlohmann::json;

const std::map<std::string, Material>& builtin_materials() {
  static const std::map<std::string, Material> table = {
      {"concrete", {"concrete", std::polar(0.50, kPi)}},
      {"metal", {"metal", std::polar(0.95, kPi)}},
      {"wood", {"wood", std::polar(0.30, kPi)}},
  };
  return table;
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double t = closest_param_on_segment(p, a, b);
  return distance(p, a + (b - a) * t);
}

}  // namespace

Scene::Scene(std::vector<Wall> walls, AccessPoint ap, double frequency_hz,
             std::vector<FeasibleSegment> feasible,
             std::map<std::string, Material> custom_materials)
    : walls_(std::move(walls)),
      ap_(ap),
      frequency_hz_(frequency_hz),
      feasible_(std::move(feasible)),
      custom_materials_(std::move(custom_materials)) {
  if (!(frequency_hz_ > 0.0) || !std::isfinite(frequency_hz_))
    throw ValidationError("carrier frequency must be positive");
  if (!std::isfinite(ap_.tx_power_dbm)) throw ValidationError("tx power must be finite");
  for (std::size_t w = 0; w < walls_.size(); ++w) {
    const Wall& wall = walls_[w];
    if (wall.length() <= kGeomEps)
      throw ValidationError("wall " + std::to_string(w) + " has zero length");
    if (std::abs(wall.material.reflection_coefficient) > 1.0)
      throw ValidationError("material '" + wall.material.name + "' has |gamma| > 1");
    if (point_segment_distance(ap_.position, wall.a, wall.b) <= kGeomEps)
      throw ValidationError("access point lies on wall " + std::to_string(w));
  }
  for (const auto& f : feasible_) {
    if (f.wall >= walls_.size())
      throw ValidationError("feasible segment references missing wall " + std::to_string(f.wall));
    if (!(f.t0 >= 0.0 && f.t1 <= 1.0 && f.t0 < f.t1))
      throw ValidationError("feasible interval must satisfy 0 <= t0 < t1 <= 1");
  }
}

double Scene::wavelength() const { return kSpeedOfLight / frequency_hz_; }

Scene Scene::with_extra_wall(const Wall& wall) const {
  auto walls = walls_;
  walls.push_back(wall);
  return Scene(std::move(walls), ap_, frequency_hz_, feasible_, custom_materials_);
}

namespace {

Vec2 parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_json(const Vec2& p) { return json::array({p.x, p.y}); }

}  // namespace

Scene parse_scene(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene is not valid JSON: ") + e.what());
  }
  try {
    std::map<std::string, Material> table = builtin_materials();
    std::map<std::string, Material> custom;
    if (doc.contains("materials")) {
      for (const auto& [name, m] : doc.at("materials").items()) {
        Material mat{name, std::polar(m.at("gamma_mag").get<double>(),
                                      m.value("gamma_phase_rad", 0.0))};
        if (m.at("gamma_mag").get<double>() < 0.0)
          throw ValidationError("material '" + name + "' has negative |gamma|");
        custom[name] = mat;
        table[name] = mat;
      }
    }

    std::vector<Wall> walls;
    for (const auto& w : doc.at("walls")) {
      const auto name = w.at("material").get<std::string>();
      auto it = table.find(name);
      if (it == table.end()) throw ValidationError("unknown material '" + name + "'");
      walls.push_back({parse_point(w.at("a")), parse_point(w.at("b")), it->second});
    }

    const auto& ap = doc.at("ap");
    AccessPoint access{parse_point(ap.at("position")), ap.at("tx_power_dbm").get<double>()};

    std::vector<FeasibleSegment> feasible;
    if (doc.contains("feasible")) {
      for (const auto& f : doc.at("feasible")) {
        const auto wall = f.at("wall").get<long long>();
        if (wall < 0) throw ValidationError("feasible wall index must be non-negative");
        feasible.push_back(
            {static_cast<std::size_t>(wall), f.at("t0").get<double>(), f.at("t1").get<double>()});
      }
    }
    return Scene(std::move(walls), access, doc.at("frequency_hz").get<double>(),
                 std::move(feasible), std::move(custom));
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene schema mismatch: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  if (!scene.custom_materials().empty()) {
    json mats = json::object();
    for (const auto& [name, m] : scene.custom_materials())
      mats[name] = {{"gamma_mag", std::abs(m.reflection_coefficient)},
                    {"gamma_phase_rad", std::arg(m.reflection_coefficient)}};
    doc["materials"] = mats;
  }
  json walls = json::array();
  for (const auto& w : scene.walls())
    walls.push_back({{"a", point_json(w.a)}, {"b", point_json(w.b)}, {"material", w.material.name}});
  doc["walls"] = walls;
  doc["ap"] = {{"position", point_json(scene.ap().position)},
               {"tx_power_dbm", scene.ap().tx_power_dbm}};
  doc["frequency_hz"] = scene.frequency_hz();
  json feasible = json::array();
  for (const auto& f : scene.feasible())
    feasible.push_back({{"wall", f.wall}, {"t0", f.t0}, {"t1", f.t1}});
  doc["feasible"] = feasible;
  return doc.dump(2);
}

std::optional<CellIndex> GridMap::locate(const Vec2& p) const {
  const double fx = (p.x - origin.x) / cell_size;
  const double fy = (p.y - origin.y) / cell_size;
  if (fx < 0.0 || fy < 0.0 || fx >= nx || fy >= ny) return std::nullopt;
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

GridMap make_grid(const Scene& scene, double cell_size) {
  if (!(cell_size > 0.0)) throw ValidationError("cell size must be positive");
  if (scene.walls().empty()) throw ValidationError("scene has no walls to bound a grid");
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& w : scene.walls()) {
    for (const Vec2& p : {w.a, w.b}) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  // The small slack keeps exact multiples (10 / 1) from rounding up to an extra cell.
  auto count = [cell_size](double extent) {
    return std::max(1, static_cast<int>(std::ceil(extent / cell_size - 1e-9)));
  };
  return GridMap{{x0, y0}, cell_size, count(x1 - x0), count(y1 - y0)};
}

FeasibleProjection project_to_feasible(const Scene& scene, const Vec2& p) {
  if (scene.feasible().empty()) throw ValidationError("scene has no feasible mounting segments");
  std::optional<FeasibleProjection> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& f : scene.feasible()) {
    const Wall& wall = scene.walls()[f.wall];
    const Vec2 a = wall.point_at(f.t0);
    const Vec2 b = wall.point_at(f.t1);
    const double u = closest_param_on_segment(p, a, b);
    const double t = f.t0 + (f.t1 - f.t0) * u;
    const Vec2 q = wall.point_at(t);
    const double d = distance(p, q);
    bool take = !best || d < best_dist - 1e-12;
    if (!take && std::abs(d - best_dist) <= 1e-12)
      take = f.wall < best->wall || (f.wall == best->wall && t < best->t);
    if (take) {
      best = FeasibleProjection{q, f.wall, t};
      best_dist = d;
    }
  }
  return *best;
}

}  // namespace mtsplan
