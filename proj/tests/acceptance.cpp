// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "mtsplan/blindspot.hpp"
#include "mtsplan/controller.hpp"
#include "mtsplan/csm.hpp"
#include "mtsplan/placement.hpp"

using namespace mtsplan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  if (!ok) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::vector<ChannelSet> gaussian(std::size_t users, std::size_t atoms, double h0_scale,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<ChannelSet> out(users);
  for (auto& c : out) {
    c.direct = h0_scale * Complex(g(rng), g(rng));
    for (std::size_t a = 0; a < atoms; ++a)
      c.cascaded.push_back({Complex(g(rng), g(rng)), Complex(g(rng), g(rng))});
  }
  return out;
}

void criterion1() {
  const std::vector<std::vector<std::uint8_t>> bits = {
      {0, 1, 0, 0}, {0, 0, 0, 0}, {1, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 1}, {0, 0, 1, 1}};
  const std::vector<double> rss = {2.8, 1.0, 1.5, 3.3, 0.3, 0.4};
  const auto t0 = Clock::now();
  SampleLog log;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    log.samples.emplace_back(bits[k]);
    log.rss_mw.push_back({rss[k]});
  }
  const double m0 = conditional_sample_mean(log, 0, 0, 0);
  const double m1 = conditional_sample_mean(log, 0, 1, 0);
  const PhaseVector decided = decide_from_log(log, 0);
  const double ms = seconds_since(t0) * 1e3;
  const bool ok = std::abs(m0 - 1.40) <= 1e-12 && std::abs(m1 - 1.70) <= 1e-12 &&
                  decided == PhaseVector(std::vector<std::uint8_t>{1, 0, 1, 0}) && ms < 1.0;
  report(1, ok,
         fmt("toy log means %.15f / %.15f, solution hex %s, %.3f ms", m0, m1,
             to_hex(decided).c_str(), ms));
}

void criterion2() {
  const std::size_t atoms = 10, T = 100000;
  const auto t0 = Clock::now();
  int good = 0;
  double ratio_sum = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const SimulationOracle o(gaussian(1, atoms, 0.0, rng), 0.0);
    const double opt = o.evaluate(exhaustive_solve(o, atoms))[0];
    const double got = o.evaluate(csm_solve(o, atoms, T, seed, 0).solution)[0];
    ratio_sum += got / opt;
    if (got >= 0.9 * opt) ++good;
  }
  const double secs = seconds_since(t0);
  report(2, good >= 95 && secs < 60.0,
         fmt("h0 = 0: csm >= 0.9 x optimum in %d / 100 instances (mean ratio %.3f), %.1f s", good,
             ratio_sum / 100, secs));

  // Same instances with a direct path for context; not part of the criterion.
  int good_h0 = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const SimulationOracle o(gaussian(1, atoms, 10.0, rng), 0.0);
    const double opt = o.evaluate(exhaustive_solve(o, atoms))[0];
    const double got = o.evaluate(csm_solve(o, atoms, T, seed, 0).solution)[0];
    if (got >= 0.9 * opt) ++good_h0;
  }
  std::printf("INFO 2: with a direct path ten times the per-atom scale: %d / 100 instances\n",
              good_h0);
}

void criterion3() {
  const std::vector<Vec2> shape = {{1, 1},   {1.5, 1}, {1, 1.5}, {1.5, 1.5}, {1.2, 1.8},
                                   {1.8, 1.2}, {6, 1},   {6.5, 1}, {6, 1.5},   {6.5, 1.5},
                                   {6.2, 1.9}, {3.5, 5}, {4, 5},   {3.7, 5.5}};
  int converged = 0, bad_shape = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = capacity_kmeans(shape, 3, 5, seed);
    if (!c.converged) continue;
    ++converged;
    int total = 0;
    for (int s : c.sizes()) {
      if (s > 5) ++bad_shape;
      total += s;
    }
    if (total != 14) ++bad_shape;
  }
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 30);
  std::uniform_int_distribution<int> nb(0, 60), mk(1, 10), ck(1, 12);
  int cases = 0, violations = 0;
  while (cases < 1000) {
    const int b = nb(rng), m = mk(rng), cap = ck(rng);
    if (m * cap < b) continue;
    ++cases;
    std::vector<Vec2> pts;
    for (int k = 0; k < b; ++k) pts.push_back({u(rng), u(rng)});
    const auto c = capacity_kmeans(pts, m, cap, cases);
    std::vector<int> load(m, 0);
    bool ok = c.assignment.size() == pts.size();
    for (int a : c.assignment) {
      if (a < 0 || a >= m) {
        ok = false;
        break;
      }
      ++load[a];
    }
    for (int l : load) ok = ok && l <= cap;
    if (!ok) ++violations;
  }
  report(3, converged > 0 && bad_shape == 0 && violations == 0,
         fmt("14-point shape: %d converged runs, %d size violations; fuzz: %d cases, %d violations",
             converged, bad_shape, cases, violations));
}

double golden(const std::function<double(double)>& f) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double lo = 0, hi = 1, x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = f(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

void criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10, 10), off(0.05, 8);
  int returned = 0, angle_bad = 0, fermat_bad = 0, triples = 0;
  double worst_angle = 0, worst_dist = 0, worst_point = 0;
  while (triples < 10000) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    if (distance(a, b) < 0.2) continue;
    ++triples;
    const Vec2 t = normalized(b - a), n = perp(t);
    const double len = distance(a, b);
    std::uniform_real_distribution<double> along(-0.5 * len, 1.5 * len);
    const Vec2 ap = a + t * along(rng) + n * off(rng);
    const Vec2 q = a + t * along(rng) + n * off(rng);
    const Scene s(std::vector<Wall>{{a, b, testutil::concrete()}}, {ap, 0}, 2.6e9, {});
    const auto p = specular_point(s, 0, ap, q);
    if (!p) continue;
    ++returned;
    const Vec2 vi = ap - *p, vo = q - *p;
    const double ai = std::atan2(std::abs(cross(n, vi)), dot(n, vi));
    const double ao = std::atan2(std::abs(cross(n, vo)), dot(n, vo));
    worst_angle = std::max(worst_angle, std::abs(ai - ao));
    if (std::abs(ai - ao) > 1e-9) ++angle_bad;
    auto path = [&](double x) {
      const Vec2 r = a + (b - a) * x;
      return distance(ap, r) + distance(r, q);
    };
    const double t_star = golden(path);
    const double gap = path(dot(*p - a, b - a) / dot(b - a, b - a)) - path(t_star);
    worst_dist = std::max(worst_dist, gap);
    worst_point = std::max(worst_point, distance(*p, a + (b - a) * t_star));
    if (gap > 1e-6) ++fermat_bad;
  }
  report(4, returned > 0 && angle_bad == 0 && fermat_bad == 0,
         fmt("%d triples, %d specular points; worst angle gap %.2e rad, worst path excess over "
             "the oracle %.2e m (oracle point within %.2e m)",
             triples, returned, worst_angle, worst_dist, worst_point));
}

void criterion5() {
  int arithmetic_bad = 0;
  for (std::size_t b = 0; b <= 100; ++b)
    for (int c = 1; c <= 10; ++c)
      if (initial_mts_count(b, c) != static_cast<int>((b + c - 1) / c)) ++arithmetic_bad;
  RunConfig cfg;
  cfg.delta_dbm = -78.0;
  const auto r = run_pipeline(testutil::data_path("scenes/room_a.json"), cfg);
  const bool ok = arithmetic_bad == 0 && r.status == DeployStatus::Cleared &&
                  r.blind_planned == 0 && r.blind_after == 0 &&
                  r.former_blind_min_after_dbm >= cfg.delta_dbm;
  report(5, ok,
         fmt("ceil(B/C) mismatches %d; room_a: %zu blind -> %zu planned, %zu after with %zu MTS, "
             "former-blind min %.2f dBm, status %s",
             arithmetic_bad, r.blind_before, r.blind_planned, r.blind_after, r.plan.mts_count(),
             r.former_blind_min_after_dbm, to_string(r.status).c_str()));
}

void criterion6() {
  const double f = 2.6e9, d = 10.0;
  const Scene s({}, {{0, 0}, 0.0}, f, {});
  const double got = field_to_dbm(path_sum(s, {0, 0}, {d, 0}), 0.0);
  const double lambda = kSpeedOfLight / f;
  const double expect = -20.0 * std::log10(4.0 * kPi * d / lambda);
  report(6, std::abs(got - expect) <= 0.01 && std::abs(expect + 60.75) <= 0.01,
         fmt("LOS at 10 m: %.4f dBm, closed form %.4f dBm", got, expect));
}

void criterion7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.5, 9.5), uy(0.5, 7.5);
  std::uniform_int_distribution<int> cols(2, 10), rows(1, 2), nusers(1, 4);
  int scenes = 0, bad = 0;
  while (scenes < 50) {
    const Vec2 ap{ux(rng), uy(rng)};
    const Scene s(testutil::rectangle(10, 8), {ap, 0.0}, 2.6e9, {{0, 0, 1}, {2, 0, 1}});
    MtsSpec spec;
    spec.cols = cols(rng);
    spec.rows = std::min(rows(rng), 20 / spec.cols);
    std::vector<Vec2> users;
    const int nu = nusers(rng);
    for (int k = 0; k < nu; ++k) users.push_back({ux(rng), uy(rng)});
    const Vec2 target = users.front();
    MtsPose pose;
    try {
      pose = place_for_cluster(s, ap, target, spec, {});
    } catch (const NoRoomError&) {
      continue;
    }
    ++scenes;
    const DeploymentPlan plan{spec, {{pose, 0, target, {}}}};
    const auto o = SimulationOracle::from_plan(s, plan, users);
    const std::size_t n = plan.total_atoms();
    const std::uint64_t seed = scenes;
    const double ex = min_user(o.evaluate(exhaustive_solve(o, n)));
    const double csm = min_user(optimize_phases(o, n, 1000, seed, PhaseVector(n)).chosen_rss_mw);
    const double greedy = min_user(o.evaluate(greedy_baseline(o, n, 1000, seed).best));
    const double zero = min_user(o.evaluate(PhaseVector(n)));
    const double tol = 1e-12 * ex;
    if (!(ex + tol >= std::max(csm, greedy) && csm + tol >= zero)) ++bad;
  }
  report(7, bad == 0, fmt("%d toy scenes, %d ordering violations", scenes, bad));
}

void criterion8() {
  int traces = 0, bad = 0;
  for (int patience = 1; patience <= 5; ++patience)
    for (int mask = 0; mask < 64; ++mask) {
      ++traces;
      FallbackState s;
      int streak = 0;
      for (int e = 0; e < 6; ++e) {
        const bool below = (mask >> e) & 1;
        const double v = below ? -90.0 : -60.0;
        const auto r = monitor_step(s, std::vector<double>{v}, -78.0, patience);
        streak = below ? streak + 1 : 0;
        if (s.mode == FallbackMode::Normal && r.state.mode == FallbackMode::RecaptureAlert) ++bad;
        if (s.mode == FallbackMode::Normal && below && r.state.mode != FallbackMode::PhaseReopt)
          ++bad;
        if (s.mode == FallbackMode::PhaseReopt && r.state.mode == FallbackMode::RecaptureAlert &&
            streak - 1 < patience)
          ++bad;
        if (s.mode == FallbackMode::PhaseReopt && below && streak - 1 >= patience &&
            r.state.mode != FallbackMode::RecaptureAlert)
          ++bad;
        if (s.mode == FallbackMode::RecaptureAlert && r.state.mode != FallbackMode::RecaptureAlert)
          ++bad;
        s = r.state;
      }
    }
  report(8, bad == 0, fmt("%d six-epoch traces over patience 1..5, %d bad transitions", traces, bad));
}

void criterion9() {
  std::ifstream f(std::string(MTSPLAN_SOURCE_DIR) + "/README.md");
  std::stringstream ss;
  ss << f.rdbuf();
  const bool ok = ss.str().find("not acceptance targets") != std::string::npos;
  report(9, ok, "README states that hardware field measurements are not acceptance targets");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
