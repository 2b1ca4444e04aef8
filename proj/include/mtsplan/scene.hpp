#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mtsplan/geometry.hpp"

namespace mtsplan {

struct Material {
  std::string name;
  std::complex<double> reflection_coefficient;  ///< |gamma| <= 1
};

/// Built-in materials: concrete, metal, wood (all with phase pi).
const std::map<std::string, Material>& builtin_materials();

struct Wall {
  Vec2 a;
  Vec2 b;
  Material material;

  double length() const { return distance(a, b); }
  Vec2 point_at(double t) const { return a + (b - a) * t; }
  Vec2 tangent() const { return normalized(b - a); }
};

/// Sub-interval [t0, t1] of a wall's a->b parametrization where an MTS may be mounted.
struct FeasibleSegment {
  std::size_t wall;
  double t0;
  double t1;
};

struct AccessPoint {
  Vec2 position;
  double tx_power_dbm;
};

/// Immutable plan-view world model. The constructor validates every invariant and
/// throws ValidationError on violation.
class Scene {
 public:
  Scene(std::vector<Wall> walls, AccessPoint ap, double frequency_hz,
        std::vector<FeasibleSegment> feasible,
        std::map<std::string, Material> custom_materials = {});

  const std::vector<Wall>& walls() const { return walls_; }
  const AccessPoint& ap() const { return ap_; }
  double frequency_hz() const { return frequency_hz_; }
  double wavelength() const;
  const std::vector<FeasibleSegment>& feasible() const { return feasible_; }
  /// Materials declared in the scene file (kept for re-serialization).
  const std::map<std::string, Material>& custom_materials() const { return custom_materials_; }

  /// Copy of this scene with one extra wall appended (not feasible for mounting).
  Scene with_extra_wall(const Wall& wall) const;

 private:
  std::vector<Wall> walls_;
  AccessPoint ap_;
  double frequency_hz_;
  std::vector<FeasibleSegment> feasible_;
  std::map<std::string, Material> custom_materials_;
};

inline constexpr double kSpeedOfLight = 299792458.0;

Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(const std::string& json_text);
std::string scene_to_json(const Scene& scene);

struct CellIndex {
  int i;
  int j;
  constexpr bool operator==(const CellIndex&) const = default;
};

/// Regular lattice of square cells; cell (i, j) has center origin + ((i+0.5)c, (j+0.5)c).
struct GridMap {
  Vec2 origin;
  double cell_size;
  int nx;
  int ny;

  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
  /// Row-major linear index: j * nx + i.
  std::size_t linear(CellIndex c) const { return static_cast<std::size_t>(c.j) * nx + c.i; }
  CellIndex cell(std::size_t linear_index) const {
    return {static_cast<int>(linear_index % nx), static_cast<int>(linear_index / nx)};
  }
  Vec2 center(CellIndex c) const {
    return {origin.x + (c.i + 0.5) * cell_size, origin.y + (c.j + 0.5) * cell_size};
  }
  /// Cell containing p, if p lies inside the grid extent.
  std::optional<CellIndex> locate(const Vec2& p) const;
};

/// Grid over the axis-aligned bounding box of all walls.
GridMap make_grid(const Scene& scene, double cell_size);

struct FeasibleProjection {
  Vec2 point;
  std::size_t wall;
  double t;  ///< parameter on the host wall
};

/// Nearest point on the union of feasible segments; ties go to the lowest wall index,
/// then the lowest parameter. Throws ValidationError if no feasible segment exists.
FeasibleProjection project_to_feasible(const Scene& scene, const Vec2& p);

}  // namespace mtsplan
