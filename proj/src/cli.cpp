#include "mtsplan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtsplan/controller.hpp"
#include "mtsplan/error.hpp"
#include "mtsplan/report.hpp"

namespace mtsplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEnvPrefix = "MTSPLAN_";
constexpr const char* kPlanSchema = "mtsplan.plan/1";

struct Options {
  std::string scene;
  std::string plan;
  std::string out_dir = ".";
  RunConfig config;
  double kappa = 0.0;
  std::vector<std::string> users;
  std::string perturb_wall;
  int perturb_epoch = -1;
  bool benchmark = false;
};

std::string env_name(const std::string& flag) {
  std::string out = kEnvPrefix;
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

template <class T>
CLI::Option* flag_opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name))->capture_default_str();
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + " '" + text + "' is not a list of numbers");
    }
  }
  if (out.size() != expected)
    throw ValidationError(what + " '" + text + "' needs " + std::to_string(expected) + " numbers");
  return out;
}

void finish_config(Options& o) {
  if (o.kappa > 0.0) o.config.spec.kappa = o.kappa;
  for (const auto& u : o.users) {
    const auto v = parse_numbers(u, 2, "user position");
    o.config.users.push_back({v[0], v[1]});
  }
  if (o.perturb_epoch >= 0) o.config.perturb_epoch = o.perturb_epoch;
  if (!o.perturb_wall.empty()) {
    const auto v = parse_numbers(o.perturb_wall, 4, "perturbation wall");
    o.config.perturb_wall = Wall{{v[0], v[1]}, {v[2], v[3]}, builtin_materials().at("metal")};
  }
  const auto& c = o.config;
  if (!(c.cell_size > 0.0)) throw ValidationError("--cell-size must be positive");
  if (c.capacity < 1) throw ValidationError("--capacity must be at least 1");
  if (c.spec.rows < 1 || c.spec.cols < 1 || !(c.spec.spacing > 0.0))
    throw ValidationError("MTS layout needs rows, cols >= 1 and positive spacing");
  if (c.samples < 1) throw ValidationError("--samples must be at least 1");
  if (c.patience < 1) throw ValidationError("--patience must be at least 1");
  if (c.monitor_epochs < 0) throw ValidationError("--monitor must be >= 0");
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("scene", o.scene, "Scene JSON file")->required()->check(CLI::ExistingFile);
  flag_opt(cmd, "out-dir", o.out_dir, "Directory for output files");
  flag_opt(cmd, "cell-size", o.config.cell_size, "Grid cell edge (m)");
  flag_opt(cmd, "delta", o.config.delta_dbm, "Blind-spot threshold (dBm)");
  flag_opt(cmd, "capacity", o.config.capacity, "Blind spots per MTS cluster (C)");
  flag_opt(cmd, "mts-rows", o.config.spec.rows, "Meta-atom rows per MTS");
  flag_opt(cmd, "mts-cols", o.config.spec.cols, "Meta-atom columns per MTS");
  flag_opt(cmd, "mts-spacing", o.config.spec.spacing, "Atom spacing (m)");
  flag_opt(cmd, "kappa", o.kappa, "Per-atom coupling override (0 = aperture default)");
  flag_opt(cmd, "samples", o.config.samples, "CSM random samples (T)");
  flag_opt(cmd, "seed", o.config.seed, "Seed for all randomness");
  flag_opt(cmd, "user", o.users, "Evaluation position x,y (repeatable)")->delimiter(';');
  cmd->add_flag("--nearest-association", o.config.nearest_association,
                "Users vote only on their nearest MTS")
      ->envname(env_name("nearest-association"));
  flag_opt(cmd, "patience", o.config.patience, "Below-threshold epochs before operator alert");
  flag_opt(cmd, "threads", o.config.threads, "Worker threads (0 = all cores)");
}

template <class Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const ParseError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

class Outputs {
 public:
  Outputs(const std::string& dir, std::string stem) : dir_(dir), stem_(std::move(stem)) {
    staged("write_output", [&] {
      fs::create_directories(dir_);
      return 0;
    });
  }

  std::string name(const std::string& suffix) const { return stem_ + "." + suffix; }

  template <class Fn>
  std::string write(const std::string& suffix, Fn&& fn) {
    const std::string file = name(suffix);
    staged("write_output", [&] {
      std::ofstream f(dir_ / file, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open " + (dir_ / file).string());
      fn(f);
      if (!f) throw std::runtime_error("write failed for " + (dir_ / file).string());
      return 0;
    });
    written_.push_back(file);
    return file;
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::string stem_;
  std::vector<std::string> written_;
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

Scene scene_of(const Options& o) {
  return staged("load_scene", [&] { return load_scene(o.scene); });
}

std::string fmt_dbm(double v) {
  if (std::isinf(v) && v > 0) return "n/a";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << emitted_dbm(v);
  return s.str();
}

int cmd_heatmap(const Options& o, std::ostream& out) {
  const Scene scene = scene_of(o);
  const auto grid = staged("make_grid", [&] { return make_grid(scene, o.config.cell_size); });
  const auto map = staged("direct_rss_map",
                          [&] { return direct_rss_map(scene, grid, {o.config.threads}); });
  Outputs files(o.out_dir, stem_of(o.scene));
  files.write("heatmap.csv", [&](std::ostream& f) { write_heatmap_csv(f, map); });
  out << "heatmap: " << grid.nx << "x" << grid.ny << " cells -> " << files.written().back()
      << '\n';
  return kExitOk;
}

int cmd_sense(const Options& o, std::ostream& out) {
  const Scene scene = scene_of(o);
  const auto grid = staged("make_grid", [&] { return make_grid(scene, o.config.cell_size); });
  const auto map = staged("direct_rss_map",
                          [&] { return direct_rss_map(scene, grid, {o.config.threads}); });
  const auto blind = staged("sense", [&] { return sense(map, o.config.delta_dbm); });
  Outputs files(o.out_dir, stem_of(o.scene));
  files.write("heatmap.csv", [&](std::ostream& f) { write_heatmap_csv(f, map); });
  files.write("blindspots.csv", [&](std::ostream& f) { write_cells_csv(f, map, blind.cells); });
  out << "sense: " << blind.size() << " blind spots below " << fmt_dbm(o.config.delta_dbm)
      << " dBm, " << initial_mts_count(blind.size(), o.config.capacity) << " initial MTS\n";
  return kExitOk;
}

json plan_file_json(const std::string& scene_name, const GreedyResult& g, const GridMap& grid) {
  json trace = json::array();
  for (const auto& it : g.trace)
    trace.push_back({{"clusters", it.clusters}, {"targets", it.targets}, {"remaining", it.remaining}});
  json initial = json::array();
  for (const auto& c : g.initial.cells) initial.push_back(json::array({c.i, c.j}));
  const double planned_min = min_over_cells(g.virtual_map, g.initial.cells);
  return {{"schema", kPlanSchema},
          {"scene", scene_name},
          {"grid", grid_to_json(grid)},
          {"status", to_string(g.status)},
          {"initial_mts", g.initial_clusters},
          {"max_mts", g.max_clusters},
          {"mts_count", g.plan.mts_count()},
          {"greedy_trace", trace},
          {"blind", {{"initial_cells", initial}, {"planned", g.remaining.size()}}},
          {"former_blind_min_planned_dbm",
           std::isinf(planned_min) && planned_min > 0 ? json(nullptr) : json(emitted_dbm(planned_min))},
          {"plan", plan_to_json(g.plan)}};
}

int exit_for(DeployStatus s) { return s == DeployStatus::Cleared ? kExitOk : kExitUncleared; }

int cmd_plan(const Options& o, std::ostream& out) {
  const Scene scene = scene_of(o);
  const auto greedy = staged("greedy_deploy", [&] { return plan_deployment(scene, o.config); });
  Outputs files(o.out_dir, stem_of(o.scene));
  files.write("plan.json", [&](std::ostream& f) {
    f << plan_file_json(stem_of(o.scene), greedy, greedy.direct.grid).dump(2) << '\n';
  });
  files.write("virtual.heatmap.csv",
              [&](std::ostream& f) { write_heatmap_csv(f, greedy.virtual_map); });
  out << "plan: " << greedy.initial.size() << " blind spots, " << greedy.plan.mts_count()
      << " MTS, " << greedy.remaining.size() << " remaining, status " << to_string(greedy.status)
      << '\n';
  return exit_for(greedy.status);
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const Scene scene = scene_of(o);
  const json pj = staged("load_plan", [&] {
    std::ifstream f(o.plan);
    if (!f) throw ParseError("cannot open plan file " + o.plan);
    try {
      return json::parse(f);
    } catch (const json::exception& e) {
      throw ParseError(std::string("plan file: ") + e.what());
    }
  });
  const DeploymentPlan plan =
      staged("load_plan", [&] { return plan_from_json(pj.contains("plan") ? pj.at("plan") : pj); });

  DeploymentReport report;
  report.scene_name = stem_of(o.scene);
  report.config = o.config;
  report.grid = staged("make_grid", [&] {
    return pj.contains("grid") ? grid_from_json(pj.at("grid")) : make_grid(scene, o.config.cell_size);
  });
  report.before = staged("direct_rss_map",
                         [&] { return direct_rss_map(scene, report.grid, {o.config.threads}); });
  std::vector<CellIndex> former;
  if (pj.contains("blind")) {
    for (const auto& c : pj.at("blind").at("initial_cells"))
      former.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  } else {
    former = sense(report.before, o.config.delta_dbm).cells;
  }
  staged("csm", [&] {
    optimize_deployment(scene, plan, former, o.config, report);
    return 0;
  });

  const std::string stem = stem_of(o.scene);
  Outputs files(o.out_dir, stem);
  files.write("phases.json", [&](std::ostream& f) {
    json users = json::array();
    for (const auto& u : report.users) users.push_back(json::array({u.x, u.y}));
    json rss = json::array(), zero = json::array();
    for (double v : report.user_rss_dbm) rss.push_back(emitted_dbm(v));
    for (double v : report.user_rss_zero_dbm) zero.push_back(emitted_dbm(v));
    f << json{{"n_atoms", report.phases.size()},
              {"hex", to_hex(report.phases)},
              {"source", report.phase_source},
              {"users", users},
              {"user_rss_dbm", rss},
              {"user_rss_zero_dbm", zero},
              {"blind_after", report.blind_after}}
             .dump(2)
      << '\n';
  });
  files.write("after.heatmap.csv", [&](std::ostream& f) { write_heatmap_csv(f, report.after); });
  if (report.sample_log.size() > 0)
    files.write("samples.csv", [&](std::ostream& f) { write_sample_log_csv(f, report.sample_log); });

  if (o.benchmark) {
    if (report.users.empty()) throw ValidationError("--benchmark needs at least one user");
    const auto rows = staged("benchmark", [&] {
      const auto oracle = SimulationOracle::from_plan(scene, plan, report.users);
      return benchmark_methods(oracle, plan.total_atoms(), o.config.samples, o.config.seed);
    });
    files.write("benchmark.csv", [&](std::ostream& f) { write_benchmark_csv(f, rows); });
    for (const auto& r : rows)
      out << "benchmark " << r.method << ": min " << fmt_dbm(r.min_user_rss_dbm) << " dBm, mean "
          << fmt_dbm(r.mean_rss_dbm) << " dBm\n";
  }
  out << "optimize: " << report.phases.size() << " atoms, " << report.users.size()
      << " users, phases from " << report.phase_source << ", " << report.blind_after
      << " blind spots after\n";
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out) {
  const Scene scene = scene_of(o);
  const std::string stem = stem_of(o.scene);
  DeploymentReport report = run_pipeline(scene, stem, o.config);
  Outputs files(o.out_dir, stem);
  report.files["heatmap_before"] = files.name("before.heatmap.csv");
  report.files["heatmap_planned"] = files.name("planned.heatmap.csv");
  report.files["heatmap_after"] = files.name("after.heatmap.csv");
  report.files["cdf"] = files.name("cdf.csv");
  if (report.sample_log.size() > 0) report.files["samples"] = files.name("samples.csv");
  files.write("before.heatmap.csv", [&](std::ostream& f) { write_heatmap_csv(f, report.before); });
  files.write("planned.heatmap.csv",
              [&](std::ostream& f) { write_heatmap_csv(f, report.planned); });
  files.write("after.heatmap.csv", [&](std::ostream& f) { write_heatmap_csv(f, report.after); });
  files.write("cdf.csv", [&](std::ostream& f) { write_cdf_csv(f, report.cdf); });
  if (report.sample_log.size() > 0)
    files.write("samples.csv", [&](std::ostream& f) { write_sample_log_csv(f, report.sample_log); });
  files.write("report.json",
              [&](std::ostream& f) { f << report_to_json(report).dump(2) << '\n'; });
  out << "run: " << report.blind_before << " blind spots, " << report.plan.mts_count()
      << " MTS, planned " << report.blind_planned << ", after " << report.blind_after
      << ", former-blind min " << fmt_dbm(report.former_blind_min_after_dbm) << " dBm, status "
      << to_string(report.status) << '\n';
  for (const auto& m : report.monitor)
    out << "monitor epoch " << m.epoch << ": min " << fmt_dbm(m.min_rss_dbm) << " dBm, "
        << to_string(m.mode) << ", " << to_string(m.action) << (m.perturbed ? ", perturbed" : "")
        << '\n';
  return exit_for(report.status);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metasurface deployment planner", "mtsplan"};
  app.require_subcommand(1);
  Options o;

  auto* heatmap = app.add_subcommand("heatmap", "Direct RSS heatmap");
  auto* sense_cmd = app.add_subcommand("sense", "Heatmap plus blind-spot list");
  auto* plan = app.add_subcommand("plan", "Greedy MTS count and placement");
  auto* optimize = app.add_subcommand("optimize", "Phase optimization for an existing plan");
  auto* run = app.add_subcommand("run", "Full pipeline");
  for (auto* cmd : {heatmap, sense_cmd, plan, optimize, run}) add_common(cmd, o);
  optimize->add_option("plan", o.plan, "Plan JSON written by `plan`")
      ->required()
      ->check(CLI::ExistingFile);
  optimize->add_flag("--benchmark", o.benchmark, "Also compare against baseline methods")
      ->envname(env_name("benchmark"));
  flag_opt(run, "monitor", o.config.monitor_epochs, "Monitoring epochs to simulate");
  flag_opt(run, "perturb-epoch", o.perturb_epoch, "Epoch at which the occluder appears (-1 = never)");
  flag_opt(run, "perturb-wall", o.perturb_wall, "Occluder x1,y1,x2,y2 (default: across the AP-MTS line)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    finish_config(o);
    if (heatmap->parsed()) return cmd_heatmap(o, out);
    if (sense_cmd->parsed()) return cmd_sense(o, out);
    if (plan->parsed()) return cmd_plan(o, out);
    if (optimize->parsed()) return cmd_optimize(o, out);
    return cmd_run(o, out);
  } catch (const StageError& e) {
    err << "error [" << e.stage() << "]: " << e.what() << '\n';
    return e.invalid_input() ? kExitValidation : kExitStage;
  } catch (const ValidationError& e) {
    err << "error [validation]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error [parse]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitStage;
  }
}

}  // namespace mtsplan
