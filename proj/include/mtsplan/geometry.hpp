#pragma once

#include <cmath>
#include <optional>

namespace mtsplan {

/// Tolerance for all intersection and side-of-line tests, in meters.
inline constexpr double kGeomEps = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(b - a); }
inline Vec2 normalized(const Vec2& v) { return v / norm(v); }
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

/// Signed distance of p from the directed line a->b (positive on the left).
double signed_distance(const Vec2& a, const Vec2& b, const Vec2& p);

/// +1 / -1 for the two open half-planes of line a->b, 0 within kGeomEps of the line.
int side_of_line(const Vec2& a, const Vec2& b, const Vec2& p);

/// Mirror image of p across the infinite line through a and b.
Vec2 reflect_across_line(const Vec2& p, const Vec2& a, const Vec2& b);

/// Parameter t of the orthogonal projection of p onto a->b, clamped to [0, 1].
double closest_param_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);

struct LineHit {
  double s;  ///< parameter along p->q
  double t;  ///< parameter along a->b
};

/// Intersection of the infinite lines p->q and a->b; nullopt when parallel.
std::optional<LineHit> intersect_lines(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b);

/// Angle between (p - v) and the wall normal, and between (q - v) and the wall normal.
/// Used to check the specular law at a reflection vertex v on the wall a->b.
struct IncidenceAngles {
  double incoming;
  double outgoing;
};
IncidenceAngles incidence_angles(const Vec2& p, const Vec2& v, const Vec2& q, const Vec2& a,
                                 const Vec2& b);

}  // namespace mtsplan
