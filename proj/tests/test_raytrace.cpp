#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mtsplan/error.hpp"
#include "mtsplan/raytrace.hpp"

using namespace mtsplan;

namespace {

constexpr double kFreq = 2.6e9;
const double kLambda = kSpeedOfLight / kFreq;

Scene make_scene(std::vector<Wall> walls, Vec2 ap, std::vector<FeasibleSegment> feasible = {},
                 double power = 0.0) {
  return Scene(std::move(walls), {ap, power}, kFreq, std::move(feasible));
}

Wall wall(Vec2 a, Vec2 b) { return {a, b, testutil::concrete()}; }

// Independent occlusion oracle: orientation predicates over the closed wall segment and
// the open p-q segment.
double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool oracle_blocked(Vec2 p, Vec2 q, const Wall& w) {
  const double d1 = orient(w.a, w.b, p), d2 = orient(w.a, w.b, q);
  const double d3 = orient(p, q, w.a), d4 = orient(p, q, w.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  // Touching cases: a wall endpoint strictly inside p-q.
  auto inside = [&](Vec2 x) {
    const double s = dot(x - p, q - p) / dot(q - p, q - p);
    return std::abs(orient(p, q, x)) < 1e-12 && s > 1e-12 && s < 1 - 1e-12;
  };
  return inside(w.a) || inside(w.b);
}

Complex friis(double d, double kappa = 1.0) {
  return kappa * kLambda / (4.0 * kPi * d) * std::exp(Complex(0.0, -2.0 * kPi * d / kLambda));
}

MtsPose pose_on(const Scene& s, std::size_t w, double t, const Vec2& toward, double extent) {
  const Wall& host = s.walls()[w];
  Vec2 n = perp(host.tangent());
  if (dot(toward - host.point_at(t), n) < 0) n = n * -1.0;
  return MtsPose{host.point_at(t), w, t, host.tangent(), n, extent};
}

}  // namespace

TEST_CASE("free-space gain and dBm conversions") {
  const Complex g = free_space_gain(10.0, kLambda);
  CHECK(std::abs(g) == doctest::Approx(kLambda / (40.0 * kPi)).epsilon(1e-12));
  CHECK(std::abs(free_space_gain(0.01, kLambda)) == doctest::Approx(std::abs(free_space_gain(0.1, kLambda))));
  CHECK(field_to_dbm(Complex{}, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(dbm_to_mw(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(mw_to_dbm(1.0) == doctest::Approx(0.0));
  CHECK(mw_to_dbm(dbm_to_mw(-73.25)) == doctest::Approx(-73.25));
  CHECK(emitted_dbm(-std::numeric_limits<double>::infinity()) == kNoSignalDbm);
}

TEST_CASE("los_clear basics") {
  const Scene empty = make_scene({}, {0, 0});
  CHECK(los_clear(empty, {0, 0}, {5, 7}));
  const Scene one = make_scene({wall({1, -1}, {1, 1})}, {0, 0});
  CHECK_FALSE(los_clear(one, {0, 0}, {2, 0}));
  CHECK(los_clear(one, {0, 0}, {0.5, 0}));
  SUBCASE("grazing an endpoint occludes") {
    CHECK_FALSE(los_clear(one, {0, 0}, {2, 2}));
    CHECK_FALSE(los_clear(one, {0, -2}, {2, 0}));
  }
  SUBCASE("collinear overlap occludes, collinear miss does not") {
    CHECK_FALSE(los_clear(one, {1, -3}, {1, 3}));
    CHECK(los_clear(one, {1, 2}, {1, 3}));
  }
  SUBCASE("endpoints on a wall are not occluded by that wall") {
    CHECK(los_clear(one, {1, 0}, {3, 0}));
  }
}

TEST_CASE("los_clear agrees with an orientation-predicate oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  int blocked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Wall> walls;
    for (int k = 0; k < 4; ++k) walls.push_back(wall({u(rng), u(rng)}, {u(rng), u(rng)}));
    const Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
    bool expect = true;
    for (const auto& w : walls) expect = expect && !oracle_blocked(p, q, w);
    const Scene s = make_scene(walls, {100, 100});
    CHECK(los_clear(s, p, q) == expect);
    blocked += expect ? 0 : 1;
  }
  CHECK(blocked > 300);
  // Lines through exact wall endpoints, built so the orientation oracle is exact.
  for (int trial = 0; trial < 500; ++trial) {
    const Wall w = wall({u(rng), u(rng)}, {u(rng), u(rng)});
    const Vec2 p{u(rng), u(rng)};
    const Vec2 q = w.a + (w.a - p);
    const Scene s = make_scene({w}, {100, 100});
    CHECK_FALSE(los_clear(s, p, q));
  }
}

TEST_CASE("trace_paths examples") {
  SUBCASE("free space gives one Friis path") {
    const Scene s = make_scene({}, {0, 0});
    const auto paths = trace_paths(s, {0, 0}, {3, 4}, 1);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].length == doctest::Approx(5));
    CHECK(std::abs(paths[0].gain) == doctest::Approx(kLambda / (4 * kPi * 5)));
    CHECK(paths[0].vertices.size() == 2);
  }
  SUBCASE("mirror symmetric bounce off y = 0") {
    const Scene s = make_scene({wall({-10, 0}, {10, 0})}, {0, 1});
    auto paths = trace_paths(s, {0, 1}, {2, 1}, 1);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].length == doctest::Approx(2));
    CHECK(paths[1].length == doctest::Approx(2 * std::sqrt(2.0)));
    CHECK(paths[1].vertices[1].x == doctest::Approx(1));
    CHECK(paths[1].vertices[1].y == doctest::Approx(0));
    CHECK(paths[1].reflection_wall == 0u);
    const Complex expect = friis(2 * std::sqrt(2.0)) * testutil::concrete().reflection_coefficient;
    CHECK(std::abs(paths[1].gain - expect) < 1e-15);
    CHECK(trace_paths(s, {0, 1}, {2, 1}, 0).size() == 1);
  }
  SUBCASE("full separating wall leaves no valid path") {
    const Scene s = make_scene({wall({5, -100}, {5, 100}), wall({0, 0}, {10, 0})}, {2, 1});
    CHECK(trace_paths(s, {2, 1}, {8, 2}, 1).empty());
    // Independent check: LOS crosses the separator, and the floor image (2, -1) gives the
    // bounce (4, 0) whose second leg crosses it too.
    CHECK(oracle_blocked({2, 1}, {8, 2}, s.walls()[0]));
    CHECK_FALSE(oracle_blocked({2, 1}, {4, 0}, s.walls()[0]));
    CHECK(oracle_blocked({4, 0}, {8, 2}, s.walls()[0]));
  }
  SUBCASE("reflection exactly at a wall endpoint is rejected") {
    const Scene s = make_scene({wall({1, 0}, {5, 0})}, {0, 1});
    const auto paths = trace_paths(s, {0, 1}, {2, 1}, 1);
    CHECK(paths.size() == 1);
  }
  SUBCASE("only orders 0 and 1") {
    const Scene s = make_scene({}, {0, 0});
    CHECK_THROWS_AS(trace_paths(s, {0, 0}, {1, 1}, 2), std::invalid_argument);
  }
}

TEST_CASE("trace_paths properties on random scenes") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.2, 9.8);
  for (int trial = 0; trial < 400; ++trial) {
    auto walls = testutil::rectangle(10, 10);
    walls.push_back(wall({u(rng), u(rng)}, {u(rng), u(rng)}));
    const Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
    const Scene s = make_scene(walls, {100, 100});
    const auto fwd = trace_paths(s, p, q, 1);
    const auto bwd = trace_paths(s, q, p, 1);

    // Reciprocity: same multiset of lengths and gains.
    REQUIRE(fwd.size() == bwd.size());
    std::vector<double> lf, lb;
    for (const auto& x : fwd) lf.push_back(x.length);
    for (const auto& x : bwd) lb.push_back(x.length);
    std::sort(lf.begin(), lf.end());
    std::sort(lb.begin(), lb.end());
    for (std::size_t k = 0; k < lf.size(); ++k) CHECK(std::abs(lf[k] - lb[k]) < 1e-9);

    for (const auto& path : fwd) {
      CHECK(path.vertices.size() >= 2);
      CHECK(std::abs(path.gain) > 0.0);
      double len = 0;
      for (std::size_t k = 1; k < path.vertices.size(); ++k)
        len += distance(path.vertices[k - 1], path.vertices[k]);
      CHECK(len == doctest::Approx(path.length).epsilon(1e-12));
      if (path.reflection_wall) {
        const Wall& w = s.walls()[*path.reflection_wall];
        const auto ang = incidence_angles(p, path.vertices[1], q, w.a, w.b);
        CHECK(std::abs(ang.incoming - ang.outgoing) <= 1e-9);
      }
    }

    // Monotonicity: an added wall can only remove the paths that existed before; its own
    // bounce is the one new path it may contribute.
    walls.push_back(wall({u(rng), u(rng)}, {u(rng), u(rng)}));
    const std::size_t added = walls.size() - 1;
    const Scene more = make_scene(walls, {100, 100});
    CHECK(trace_paths(more, p, q, 0).size() <= trace_paths(s, p, q, 0).size());
    std::size_t kept = 0;
    for (const auto& path : trace_paths(more, p, q, 1)) {
      if (path.reflection_wall == added) continue;
      ++kept;
      bool found = false;
      for (const auto& old : fwd) found = found || std::abs(old.length - path.length) < 1e-12;
      CHECK(found);
    }
    CHECK(kept <= fwd.size());
  }
}

TEST_CASE("direct_rss_map") {
  SUBCASE("Friis at 10 m") {
    // A far-away wall gives the scene a grid without adding reachable reflections.
    const Scene s = make_scene({wall({-0.5, -50}, {-0.5, -49})}, {0.5, 0.5});
    GridMap g{{0, 0}, 1.0, 11, 1};
    const auto map = direct_rss_map(s, g);
    CHECK(map.at({10, 0}) == doctest::Approx(-20.0 * std::log10(4 * kPi * 10 / kLambda)).epsilon(1e-12));
    CHECK(map.at({10, 0}) == doctest::Approx(-60.75).epsilon(0.01 / 60.75));
    REQUIRE(map.excluded);
    CHECK(*map.excluded == 0u);
    CHECK(std::isfinite(map.at({0, 0})));
  }
  SUBCASE("enclosed cell gets no signal") {
    auto walls = testutil::rectangle(6, 6);
    const std::vector<Wall> box = {wall({4, 4}, {5, 4}), wall({5, 4}, {5, 5}), wall({5, 5}, {4, 5}),
                                   wall({4, 5}, {4, 4})};
    walls.insert(walls.end(), box.begin(), box.end());
    const Scene s = make_scene(walls, {1.5, 1.5});
    const auto map = direct_rss_map(s, make_grid(s, 1.0));
    CHECK(map.at({4, 4}) == -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(map.at({2, 2})));
  }
  SUBCASE("thread count does not change results") {
    const Scene s = load_scene(testutil::data_path("scenes/room_a.json"));
    const GridMap g = make_grid(s, 0.5);
    const auto a = direct_rss_map(s, g, {1});
    const auto b = direct_rss_map(s, g, {7});
    CHECK(a.rss_dbm == b.rss_dbm);
  }
}

TEST_CASE("atom coupling") {
  MtsSpec spec;
  CHECK(atom_coupling(spec, kLambda) == doctest::Approx(std::sqrt(4 * kPi) * 0.06 / kLambda));
  spec.kappa = 0.06;
  CHECK(atom_coupling(spec, kLambda) == 0.06);
}

TEST_CASE("cascaded channels") {
  SUBCASE("single atom, two-hop Friis") {
    const Scene s = make_scene({wall({-10, 0}, {10, 0})}, {-2, 3}, {{0, 0.0, 1.0}});
    DeploymentPlan plan{MtsSpec{1, 1, 0.06, 0.5}, {}};
    plan.panels.push_back({pose_on(s, 0, 0.5, {0, 1}, 0.06), 0, {3, 4}, {}});
    const Vec2 rx{3, 4};
    const auto ch = cascaded_channels(s, plan, rx);
    REQUIRE(ch.cascaded.size() == 1);
    CHECK(std::abs(ch.cascaded[0].ap_to_atom) == doctest::Approx(0.5 * kLambda / (4 * kPi * std::sqrt(13.0))));
    CHECK(std::abs(ch.cascaded[0].atom_to_rx) == doctest::Approx(0.5 * kLambda / (4 * kPi * 5.0)));
    // Direct: LOS plus the bounce off the host wall.
    CHECK(std::abs(ch.direct - path_sum(s, {-2, 3}, rx)) == 0.0);
  }
  SUBCASE("2x2 panel phases follow per-atom distances") {
    const Scene s = make_scene({wall({-10, 0}, {10, 0})}, {-2, 3}, {{0, 0.0, 1.0}});
    MtsSpec spec{2, 2, 0.06, 1.0};
    DeploymentPlan plan{spec, {}};
    const MtsPose pose = pose_on(s, 0, 0.5, {0, 1}, spec.extent());
    plan.panels.push_back({pose, 0, {3, 4}, {}});
    const Vec2 ap{-2, 3}, rx{3, 4};
    const auto ch = cascaded_channels(s, plan, rx);
    REQUIRE(ch.cascaded.size() == 4);
    const double xs[2] = {-0.03, 0.03};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const Vec2 p{xs[c], 0.0};
        const auto& pair = ch.cascaded[r * 2 + c];
        CHECK(std::abs(pair.ap_to_atom - friis(distance(ap, p))) < 1e-12);
        CHECK(std::abs(pair.atom_to_rx - friis(distance(p, rx))) < 1e-12);
      }
    }
    const double dphase = std::arg(ch.cascaded[1].ap_to_atom / ch.cascaded[0].ap_to_atom);
    const double expect = -2 * kPi * (distance(ap, {0.03, 0}) - distance(ap, {-0.03, 0})) / kLambda;
    CHECK(dphase == doctest::Approx(std::remainder(expect, 2 * kPi)));
  }
  SUBCASE("occluded panel contributes nothing") {
    const Scene s = make_scene({wall({0, 0}, {10, 0}), wall({3, 0.5}, {7, 0.5})}, {0, 5},
                               {{0, 0.0, 1.0}});
    DeploymentPlan plan{MtsSpec{2, 3, 0.06, std::nullopt}, {}};
    plan.panels.push_back({pose_on(s, 0, 0.5, {5, 5}, 0.18), 0, {9, 5}, {}});
    const auto ch = cascaded_channels(s, plan, {9, 5});
    REQUIRE(ch.cascaded.size() == 6);
    for (const auto& pair : ch.cascaded) {
      CHECK(pair.ap_to_atom == Complex{});
      CHECK(pair.atom_to_rx == Complex{});
    }
    const PhaseVector any(std::vector<std::uint8_t>{1, 0, 1, 1, 0, 0});
    CHECK(combined_rss(ch, any, 0.0) == field_to_dbm(ch.direct, 0.0));
  }
  SUBCASE("pose outside the feasible region") {
    const Scene s = make_scene({wall({0, 0}, {10, 0})}, {0, 5}, {{0, 0.0, 0.3}});
    DeploymentPlan plan{MtsSpec{1, 4, 0.06, std::nullopt}, {}};
    plan.panels.push_back({pose_on(s, 0, 0.5, {5, 5}, 0.24), 0, {5, 5}, {}});
    CHECK_THROWS_AS(cascaded_channels(s, plan, {5, 5}), ValidationError);
  }
}

TEST_CASE("combined_rss") {
  SUBCASE("no atoms equals the direct field") {
    const ChannelSet ch{{1e-3, 2e-3}, {}};
    CHECK(combined_rss(ch, PhaseVector(0), 5.0) == doctest::Approx(5.0 + 20 * std::log10(std::abs(Complex(1e-3, 2e-3)))));
  }
  SUBCASE("two equal real atoms, all four configurations") {
    const double g = 1e-3;
    const ChannelSet ch{{0, 0}, {{g, 1.0}, {g, 1.0}}};
    for (int k = 0; k < 4; ++k) {
      const PhaseVector v(std::vector<std::uint8_t>{static_cast<std::uint8_t>(k >> 1), static_cast<std::uint8_t>(k & 1)});
      const double rss = combined_rss(ch, v, 0.0);
      if (k == 0 || k == 3)
        CHECK(dbm_to_mw(rss) == doctest::Approx(4 * g * g));
      else
        CHECK(rss == -std::numeric_limits<double>::infinity());
    }
  }
  SUBCASE("global flip leaves RSS unchanged when h0 = 0") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    ChannelSet ch{{0, 0}, {}};
    for (int k = 0; k < 9; ++k) ch.cascaded.push_back({{n01(rng), n01(rng)}, {n01(rng), n01(rng)}});
    for (int k = 0; k < 512; ++k) {
      PhaseVector v(9), f(9);
      for (int b = 0; b < 9; ++b) {
        v.bits[b] = (k >> b) & 1;
        f.bits[b] = 1 - v.bits[b];
      }
      CHECK(combined_rss(ch, v, 0.0) == doctest::Approx(combined_rss(ch, f, 0.0)).epsilon(1e-12));
    }
  }
  SUBCASE("single atom by hand") {
    const Complex h0{0.2, -0.1}, a{0.3, 0.4}, b{-0.5, 0.1};
    const ChannelSet ch{h0, {{a, b}}};
    CHECK(combined_rss(ch, PhaseVector(1), 0.0) == doctest::Approx(20 * std::log10(std::abs(h0 + a * b))));
    CHECK(combined_rss(ch, PhaseVector(std::vector<std::uint8_t>{1}), 0.0) ==
          doctest::Approx(20 * std::log10(std::abs(h0 - a * b))));
  }
  SUBCASE("length mismatch") {
    const ChannelSet ch{{1, 0}, {{1, 1}}};
    CHECK_THROWS_AS(combined_rss(ch, PhaseVector(2), 0.0), std::invalid_argument);
  }
  SUBCASE("determinism") {
    const Scene s = load_scene(testutil::data_path("scenes/room_a.json"));
    const auto a = path_sum(s, s.ap().position, {8.5, 2.5});
    const auto b = path_sum(s, s.ap().position, {8.5, 2.5});
    CHECK(a == b);
  }
}

TEST_CASE("panel heatmap agrees with per-cell cascaded channels") {
  const Scene s = load_scene(testutil::data_path("scenes/room_a.json"));
  MtsSpec spec{3, 5, 0.06, std::nullopt};
  DeploymentPlan plan{spec, {}};
  const auto proj = project_to_feasible(s, {7.5, 8});
  plan.panels.push_back({pose_on(s, proj.wall, proj.t, s.ap().position, spec.extent()), 0, {8, 2}, {}});
  PhaseVector v(spec.atoms());
  std::mt19937_64 rng(9);
  for (auto& b : v.bits) b = rng() & 1;
  const GridMap g = make_grid(s, 1.0);
  const auto map = rss_map_with_panels(s, plan, v, g);
  for (std::size_t k = 0; k < g.cell_count(); k += 7) {
    const auto ch = cascaded_channels(s, plan, g.center(g.cell(k)));
    const double expect = combined_rss(ch, v, s.ap().tx_power_dbm);
    if (std::isinf(expect))
      CHECK(std::isinf(map.rss_dbm[k]));
    else
      CHECK(map.rss_dbm[k] == doctest::Approx(expect).epsilon(1e-9));
  }
}
