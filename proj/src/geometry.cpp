#include "mtsplan/geometry.hpp"

#include <algorithm>

namespace mtsplan {

double signed_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 d = b - a;
  return cross(d, p - a) / norm(d);
}

int side_of_line(const Vec2& a, const Vec2& b, const Vec2& p) {
  const double sd = signed_distance(a, b, p);
  if (sd > kGeomEps) return 1;
  if (sd < -kGeomEps) return -1;
  return 0;
}

Vec2 reflect_across_line(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = dot(p - a, d) / dot(d, d);
  const Vec2 foot = a + d * t;
  return foot * 2.0 - p;
}

double closest_param_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = dot(p - a, d) / dot(d, d);
  return std::clamp(t, 0.0, 1.0);
}

std::optional<LineHit> intersect_lines(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
  const Vec2 d = q - p;
  const Vec2 e = b - a;
  const double denom = cross(d, e);
  // Relative parallelism test; both directions have positive length here.
  if (std::abs(denom) <= 1e-15 * norm(d) * norm(e)) return std::nullopt;
  const Vec2 w = a - p;
  return LineHit{cross(w, e) / denom, cross(w, d) / denom};
}

IncidenceAngles incidence_angles(const Vec2& p, const Vec2& v, const Vec2& q, const Vec2& a,
                                 const Vec2& b) {
  const Vec2 n = normalized(perp(b - a));
  auto angle_to_normal = [&](const Vec2& dir) {
    const Vec2 u = normalized(dir);
    // atan2 of |cross| and |dot| stays accurate near both 0 and pi/2.
    return std::atan2(std::abs(cross(n, u)), std::abs(dot(n, u)));
  };
  return {angle_to_normal(p - v), angle_to_normal(q - v)};
}

}  // namespace mtsplan
