#include "ipromp/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "ipromp/errors.hpp"
#include "json.hpp"

namespace ipromp {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failure: " + path);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_demo_json(DemoGenParams& demo, const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "T")
      demo.T = value.get<double>();
    else if (key == "samples_per_goal")
      demo.samples_per_goal = value.get<int>();
    else if (key == "sample_rate")
      demo.sample_rate = value.get<double>();
    else if (key == "end_noise_std")
      demo.end_noise_std = value.get<double>();
    else if (key == "swing_offset")
      demo.swing_offset = value.get<double>();
    else if (key == "dip_depth")
      demo.dip_depth = value.get<double>();
    else if (key == "dip_phase")
      demo.dip_phase = value.get<double>();
    else if (key == "via_count")
      demo.via_count = value.get<int>();
    else if (key == "via_jitter_std")
      demo.via_jitter_std = value.get<double>();
    else
      throw ValidationError("config: unknown demo key '" + key + "'");
  }
}

}  // namespace

RunConfig config_from_json_string(const std::string& text, RunConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("config JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed")
        base.seed = value.get<std::uint64_t>();
      else if (key == "scene")
        base.scene = value.get<std::string>();
      else if (key == "out_dir")
        base.out_dir = value.get<std::string>();
      else if (key == "target_id")
        base.target_id = value.get<std::string>();
      else if (key == "targets")
        base.targets = value.get<std::vector<std::string>>();
      else if (key == "k1")
        base.k1 = value.get<int>();
      else if (key == "k2")
        base.k2 = value.get<int>();
      else if (key == "h1")
        base.h1 = value.get<double>();
      else if (key == "h2")
        base.h2 = value.get<double>();
      else if (key == "lambda")
        base.lambda = value.get<double>();
      else if (key == "t1")
        base.t1 = value.get<double>();
      else if (key == "T_total")
        base.T_total = value.get<double>();
      else if (key == "tc_preset")
        base.tc_preset = value.get<std::string>();
      else if (key == "naive")
        base.naive = value.get<bool>();
      else if (key == "repeat")
        base.repeat = value.get<int>();
      else if (key == "figure")
        base.figure = value.get<std::string>();
      else if (key == "goal_count")
        base.goal_count = value.get<int>();
      else if (key == "demo")
        apply_demo_json(base.demo, value);
      else if (key == "demos_path")
        base.demos_path = value.get<std::string>();
      else if (key == "model1_path")
        base.model1_path = value.get<std::string>();
      else if (key == "model2_path")
        base.model2_path = value.get<std::string>();
      else if (key == "plan_path")
        base.plan_path = value.get<std::string>();
      else if (key == "trajectory_path")
        base.trajectory_path = value.get<std::string>();
      else
        throw ValidationError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: bad field type: ") + e.what());
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_string(text, std::move(base));
}

Vec3 home_position() { return {0.0, 0.0, 0.3}; }

std::vector<Vec3> default_goal_ring(int count) {
  if (count < 1) throw ValidationError("goal ring needs at least one goal");
  std::vector<Vec3> goals;
  goals.reserve(count);
  for (int j = 0; j < count; ++j) {
    const double a = 2.0 * M_PI * j / count;
    goals.emplace_back(0.04 * std::cos(a), 0.04 * std::sin(a), j % 2 == 0 ? 0.14 : 0.18);
  }
  return goals;
}

std::string resolve_out_dir(const RunConfig& cfg) {
  const char* env = std::getenv("PROMP_PUSH_OUT");
  const std::string dir = env && *env ? env : cfg.out_dir;
  if (dir.empty()) throw ValidationError("output directory is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

ClusterScene resolve_scene(const RunConfig& cfg) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), cfg.scene) != names.end()) return preset(cfg.scene);
  return load_scene(cfg.scene);
}

std::vector<double> resolve_tc(const RunConfig& cfg) {
  if (cfg.tc_preset == "tc1") return tc_preset_1();
  if (cfg.tc_preset == "tc2") return tc_preset_2();
  throw ValidationError("unknown conditioning-time preset: " + cfg.tc_preset +
                        " (expected tc1 or tc2)");
}

DemoSet resolve_demos(const RunConfig& cfg) {
  if (!cfg.demos_path.empty()) return load_demoset(cfg.demos_path);
  return generate_nominals(home_position(), default_goal_ring(cfg.goal_count), cfg.demo,
                           cfg.seed);
}

SegmentModels train_segments(const DemoSet& set, const RunConfig& cfg) {
  if (!(cfg.t1 > 0.0 && cfg.t1 < cfg.T_total))
    throw ValidationError("train: t1 must lie inside (0, T_total)");
  if (set.demos.empty()) throw ValidationError("train: demo set is empty");

  // Split the demos at the sample stamp nearest to the t1 fraction.
  const double exact = cfg.t1 / cfg.T_total * set.T;
  double zone = set.demos.front().times.front();
  for (double t : set.demos.front().times)
    if (std::abs(t - exact) < std::abs(zone - exact)) zone = t;
  if (!(zone > 0.0 && zone < set.T))
    throw ValidationError("train: the zone split has no interior sample stamp");

  const GaussianBasisFamily f1 = cfg.h1 > 0.0 ? GaussianBasisFamily::uniform(cfg.k1, cfg.h1)
                                              : GaussianBasisFamily::uniform(cfg.k1);
  const GaussianBasisFamily f2 = cfg.h2 > 0.0 ? GaussianBasisFamily::uniform(cfg.k2, cfg.h2)
                                              : GaussianBasisFamily::uniform(cfg.k2);
  SegmentModels models;
  models.mp1 = learn(slice_time_zone(set, 0.0, zone), f1, cfg.lambda);
  models.mp2 = learn(slice_time_zone(set, zone, set.T), f2, cfg.lambda);
  return models;
}

SegmentModels resolve_models(const RunConfig& cfg) {
  if (cfg.model1_path.empty() != cfg.model2_path.empty())
    throw ValidationError("model paths must be given for both segments or neither");
  if (!cfg.model1_path.empty())
    return {load_model(cfg.model1_path), load_model(cfg.model2_path)};
  return train_segments(resolve_demos(cfg), cfg);
}

DemoOutcome cmd_demos(const RunConfig& cfg) {
  const DemoSet set = resolve_demos(cfg);
  const std::string out = resolve_out_dir(cfg);

  DemoOutcome o;
  o.demo_count = set.demos.size();
  o.demos_json = out + "/demos.json";
  save_demoset(set, o.demos_json);

  o.demos_csv = out + "/demos.csv";
  std::ofstream csv(o.demos_csv);
  if (!csv) throw IoError("cannot open for writing: " + o.demos_csv);
  csv << "demo,nominal,t,x,y,z\n";
  for (std::size_t d = 0; d < set.demos.size(); ++d) {
    const Demonstration& demo = set.demos[d];
    for (std::size_t i = 0; i < demo.times.size(); ++i)
      csv << d << ',' << demo.nominal_id << ',' << fmt(demo.times[i]) << ','
          << fmt(demo.points[i].x()) << ',' << fmt(demo.points[i].y()) << ','
          << fmt(demo.points[i].z()) << '\n';
  }
  if (!csv) throw IoError("write failure: " + o.demos_csv);
  return o;
}

TrainOutcome cmd_train(const RunConfig& cfg) {
  const SegmentModels models = train_segments(resolve_demos(cfg), cfg);
  const std::string out = resolve_out_dir(cfg);
  TrainOutcome o;
  o.model1_json = out + "/model_mp1.json";
  o.model2_json = out + "/model_mp2.json";
  save_model(models.mp1, o.model1_json);
  save_model(models.mp2, o.model2_json);
  return o;
}

namespace {

void translate_model(ProMPModel& model, const Vec3& delta) {
  for (int axis = 0; axis < 3; ++axis) model.mu_w[axis].array() += delta[axis];
}

std::vector<double> dense_grid(double T, double rate) {
  std::vector<double> times;
  const int n = static_cast<int>(std::lround(T * rate));
  times.reserve(n + 1);
  for (int i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) / rate);
  times.back() = T;
  return times;
}

ExperimentOutcome run_fig5(const RunConfig& cfg) {
  const DemoSet set = resolve_demos(cfg);
  const std::vector<double>& grid = set.demos.front().times;
  for (const Demonstration& demo : set.demos)
    if (demo.times != grid)
      throw ValidationError("fig5: demonstrations must share one sampling grid");

  std::vector<Vec3> train_mean(grid.size(), Vec3::Zero());
  for (const Demonstration& demo : set.demos)
    for (std::size_t i = 0; i < grid.size(); ++i) train_mean[i] += demo.points[i];
  for (Vec3& m : train_mean) m /= static_cast<double>(set.demos.size());

  const std::string out = resolve_out_dir(cfg);
  ExperimentOutcome o;
  const int ks[2] = {4, 10};
  double deviation[2] = {0.0, 0.0};
  for (int c = 0; c < 2; ++c) {
    const ProMPModel model = learn(set, GaussianBasisFamily::uniform(ks[c]), cfg.lambda);
    const TrajectoryDistribution dist = marginal(model, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      deviation[c] = std::max(deviation[c], (dist.mean[i] - train_mean[i]).norm());

    const std::string path = out + "/fig5_k" + std::to_string(ks[c]) + ".csv";
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "t,x,y,z,var_x,var_y,var_z,train_x,train_y,train_z\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      f << fmt(grid[i]);
      for (int a = 0; a < 3; ++a) f << ',' << fmt(dist.mean[i][a]);
      for (int a = 0; a < 3; ++a) f << ',' << fmt(dist.variance[i][a]);
      for (int a = 0; a < 3; ++a) f << ',' << fmt(train_mean[i][a]);
      f << '\n';
    }
    if (!f) throw IoError("write failure: " + path);
    o.files.push_back(path);
  }

  const std::string summary = out + "/fig5_summary.csv";
  write_text(summary, "case,max_deviation_m\nk4," + fmt(deviation[0]) + "\nk10," +
                          fmt(deviation[1]) + "\nk10_below_k4," +
                          (deviation[1] < deviation[0] ? "true" : "false") + "\n");
  o.files.push_back(summary);
  return o;
}

ExperimentOutcome run_fig6(const RunConfig& cfg) {
  const DemoSet set = resolve_demos(cfg);
  const double T = cfg.T_total;
  const double t1 = cfg.t1;
  const Vec3 hard = Vec3::Constant(kHardWaypointVariance);

  // One fixed conditioning tour: start high, dip below the cluster, wiggle
  // through three side points, finish at the pick height.
  const std::vector<Vec3> pts = {home_position(),       {0.0, 0.0, 0.05}, {0.02, 0.0, 0.10},
                                 {0.065, 0.0, 0.10},    {-0.02, 0.0, 0.13}, {0.0, 0.0, 0.15}};

  struct Fig6Case {
    const char* name;
    int segments;
    int k1;
    int k2;
    bool use_tc2;
  };
  const Fig6Case cases[] = {
      {"a", 1, 20, 0, false}, {"b", 1, 10, 0, false}, {"c", 1, 4, 0, false},
      {"d", 1, 10, 0, true},  {"e", 2, 4, 4, false},  {"f", 2, 4, 5, false},
  };

  const std::string out = resolve_out_dir(cfg);
  ExperimentOutcome o;
  std::string summary = "case,segments,k1,k2,preset,max_miss_m\n";

  for (const Fig6Case& c : cases) {
    const std::vector<double> times = c.use_tc2 ? tc_preset_2() : tc_preset_1();
    if (times.size() != pts.size())
      throw ValidationError("fig6: conditioning preset size mismatch");

    TrajectoryDistribution dist;
    double miss = 0.0;
    if (c.segments == 1) {
      ProMPModel model = learn(set, GaussianBasisFamily::uniform(c.k1), cfg.lambda);
      model.T = T;  // stretch the single primitive over the full plan span
      translate_model(model, pts[0] - mean_at(model, 0.0));
      std::vector<Waypoint> wps;
      for (std::size_t i = 0; i < pts.size(); ++i) wps.push_back({times[i], pts[i], hard});
      const ProMPModel cond = condition_all(model, wps);
      dist = marginal(cond, dense_grid(T, 100.0));
      for (std::size_t i = 0; i < pts.size(); ++i)
        miss = std::max(miss, (mean_at(cond, times[i]) - pts[i]).norm());
    } else {
      RunConfig local = cfg;
      local.k1 = c.k1;
      local.k2 = c.k2;
      SegmentModels models = train_segments(set, local);
      const Vec3 delta = pts[0] - mean_at(models.mp1, 0.0);
      translate_model(models.mp1, delta);
      translate_model(models.mp2, delta);

      std::optional<Vec3> junction;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::abs(times[i] - t1) <= 1e-12)
          junction = pts[i];
        else if (times[i] < t1)
          models.mp1 = condition(models.mp1, {times[i] / t1 * models.mp1.T, pts[i], hard});
        else
          models.mp2 =
              condition(models.mp2, {(times[i] - t1) / (T - t1) * models.mp2.T, pts[i], hard});
      }
      const CompositePrimitive comp =
          junction ? compose_with_junction(models.mp1, models.mp2, t1, T, *junction)
                   : compose(models.mp1, models.mp2, t1, T);
      dist = marginal(comp, dense_grid(T, 100.0));
      for (std::size_t i = 0; i < pts.size(); ++i)
        miss = std::max(miss, (mean_at(comp, times[i]) - pts[i]).norm());
    }

    const std::string path = out + "/fig6_" + c.name + ".csv";
    write_trajectory_csv(dist, path);
    o.files.push_back(path);
    summary += std::string(c.name) + ',' + std::to_string(c.segments) + ',' +
               std::to_string(c.k1) + ',' + std::to_string(c.k2) + ',' +
               (c.use_tc2 ? "tc2" : "tc1") + ',' + fmt(miss) + '\n';
  }

  const std::string summary_path = out + "/fig6_summary.csv";
  write_text(summary_path, summary);
  o.files.push_back(summary_path);
  return o;
}

}  // namespace

ExperimentOutcome cmd_experiment(const RunConfig& cfg) {
  if (cfg.figure == "fig5") return run_fig5(cfg);
  if (cfg.figure == "fig6") return run_fig6(cfg);
  throw ValidationError("unknown experiment figure: " + cfg.figure + " (expected fig5 or fig6)");
}

PlanOutcome cmd_plan(const RunConfig& cfg) {
  if (cfg.repeat < 1) throw ValidationError("plan: repeat must be >= 1");
  const ClusterScene scene = resolve_scene(cfg);
  const Fruit* target = scene.find_fruit(cfg.target_id);
  if (!target) throw ValidationError("plan: unknown target fruit " + cfg.target_id);
  const SegmentModels models = resolve_models(cfg);

  PlanOutcome o;
  o.plan = plan_pushes(scene, cfg.target_id);

  SchedulePolicy policy;
  policy.t1 = cfg.t1;
  policy.total_T = cfg.T_total;
  policy.naive = cfg.naive;
  const ConditioningSchedule schedule =
      build_schedule(o.plan, home_position(), target->position, resolve_tc(cfg), policy);

  o.result = generate(models.mp1, models.mp2, schedule);
  o.result.target_id = cfg.target_id;
  if (cfg.repeat > 1) {
    double sum = o.result.planning_time;
    double sum_sq = o.result.planning_time * o.result.planning_time;
    for (int i = 1; i < cfg.repeat; ++i) {
      const double dt = generate(models.mp1, models.mp2, schedule).planning_time;
      sum += dt;
      sum_sq += dt * dt;
    }
    o.latency_mean = sum / cfg.repeat;
    o.latency_std =
        std::sqrt(std::max(0.0, sum_sq / cfg.repeat - o.latency_mean * o.latency_mean));
  } else {
    o.latency_mean = o.result.planning_time;
  }

  const std::string out = resolve_out_dir(cfg);
  o.plan_json = out + "/plan.json";
  save_plan(o.plan, o.plan_json);
  o.schedule_json = out + "/schedule.json";
  write_text(o.schedule_json, to_json_string(schedule) + "\n");
  o.trajectory_csv = out + "/trajectory.csv";
  write_trajectory_csv(o.result.mean_path, o.trajectory_csv);
  return o;
}

ReplayOutcome cmd_replay(const RunConfig& cfg) {
  const ClusterScene scene = resolve_scene(cfg);
  const std::string out = resolve_out_dir(cfg);
  const std::string traj_path =
      cfg.trajectory_path.empty() ? out + "/trajectory.csv" : cfg.trajectory_path;
  const TrajectoryDistribution dist = read_trajectory_csv(traj_path);
  const PushPlan plan =
      cfg.plan_path.empty() ? plan_pushes(scene, cfg.target_id) : load_plan(cfg.plan_path);

  ReplayOutcome o;
  o.trace = replay(scene, mean_trajectory(dist));
  o.metrics = contact_metrics(o.trace, scene, plan);

  o.trace_csv = out + "/trace.csv";
  write_trace_csv(o.trace, o.trace_csv);

  nlohmann::json j;
  j["scene"] = cfg.scene;
  j["target_id"] = plan.target_id;
  j["jam"] = o.trace.jam
                 ? nlohmann::json{{"tick", o.trace.jam->tick}, {"fruit_id", o.trace.jam->fruit_id}}
                 : nlohmann::json(nullptr);
  j["fruits"] = nlohmann::json::array();
  for (const ContactMetric& m : o.metrics) {
    nlohmann::json mj;
    mj["id"] = m.fruit_id;
    mj["applicable"] = m.applicable;
    if (m.applicable) {
      mj["h_min_cm"] = m.h_min * 100.0;
      mj["h_max_cm"] = m.h_max * 100.0;
    }
    mj["contact"] = m.contact;
    mj["swallowed"] = m.swallowed;
    j["fruits"].push_back(std::move(mj));
  }
  o.metrics_json = out + "/metrics.json";
  write_text(o.metrics_json, j.dump(2) + "\n");
  return o;
}

CycleOutcome cmd_pick_cycle(const RunConfig& cfg) {
  const ClusterScene scene = resolve_scene(cfg);
  std::vector<std::string> targets = cfg.targets;
  if (targets.empty())
    for (const Fruit& f : scene.fruits)
      if (f.ripe) targets.push_back(f.id);
  const SegmentModels models = resolve_models(cfg);

  SchedulePolicy policy;
  policy.t1 = cfg.t1;
  policy.total_T = cfg.T_total;
  policy.naive = cfg.naive;

  CycleOutcome o;
  o.results = pick_cycle(models.mp1, models.mp2, scene, targets, home_position(),
                         resolve_tc(cfg), policy);

  const std::string out = resolve_out_dir(cfg);
  nlohmann::json j;
  j["scene"] = cfg.scene;
  j["targets"] = targets;
  j["results"] = nlohmann::json::array();
  for (std::size_t i = 0; i < o.results.size(); ++i) {
    const IProMPResult& r = o.results[i];
    nlohmann::json rj;
    rj["target_id"] = r.target_id;
    rj["ok"] = r.ok;
    if (r.ok) {
      const std::string path = out + "/trajectory_" + std::to_string(i) + ".csv";
      write_trajectory_csv(r.mean_path, path);
      o.trajectory_csvs.push_back(path);
      rj["trajectory"] = "trajectory_" + std::to_string(i) + ".csv";
      rj["waypoints"] = r.schedule.entries.size();
    } else {
      rj["error"] = r.error;
    }
    j["results"].push_back(std::move(rj));
  }
  o.cycle_json = out + "/cycle.json";
  write_text(o.cycle_json, j.dump(2) + "\n");
  return o;
}

int run_command(const std::string& command, const RunConfig& cfg) {
  try {
    if (command == "demos") {
      const DemoOutcome o = cmd_demos(cfg);
      std::cout << "wrote " << o.demo_count << " demonstrations: " << o.demos_json << ", "
                << o.demos_csv << "\n";
    } else if (command == "train") {
      const TrainOutcome o = cmd_train(cfg);
      std::cout << "wrote segment models: " << o.model1_json << ", " << o.model2_json << "\n";
    } else if (command == "experiment") {
      const ExperimentOutcome o = cmd_experiment(cfg);
      std::cout << "wrote " << o.files.size() << " experiment files:";
      for (const std::string& f : o.files) std::cout << ' ' << f;
      std::cout << "\n";
    } else if (command == "plan") {
      const PlanOutcome o = cmd_plan(cfg);
      std::cout << "planned " << cfg.target_id << " in " << cfg.scene << ": "
                << o.plan.directives.size() << " push directives, "
                << o.result.schedule.entries.size() << " waypoints\n";
      std::cout << "generation time: mean " << o.latency_mean << " s, std " << o.latency_std
                << " s over " << cfg.repeat << " run(s)\n";
      std::cout << "wrote " << o.plan_json << ", " << o.schedule_json << ", "
                << o.trajectory_csv << "\n";
    } else if (command == "replay") {
      const ReplayOutcome o = cmd_replay(cfg);
      std::cout << "replayed " << o.trace.times.size() << " ticks in " << cfg.scene << "\n";
      if (o.trace.jam)
        std::cout << "jam at tick " << o.trace.jam->tick << " on fruit " << o.trace.jam->fruit_id
                  << "\n";
      for (const ContactMetric& m : o.metrics) {
        std::cout << "  " << m.fruit_id << ": ";
        if (!m.applicable) {
          std::cout << "not reached\n";
          continue;
        }
        std::cout << "h_min " << m.h_min * 100.0 << " cm, h_max " << m.h_max * 100.0
                  << " cm, contact " << (m.contact ? "yes" : "no") << ", swallowed "
                  << (m.swallowed ? "yes" : "no") << "\n";
      }
      std::cout << "wrote " << o.trace_csv << ", " << o.metrics_json << "\n";
    } else if (command == "pick-cycle") {
      const CycleOutcome o = cmd_pick_cycle(cfg);
      std::size_t ok = 0;
      for (const IProMPResult& r : o.results) ok += r.ok ? 1 : 0;
      std::cout << "planned " << ok << "/" << o.results.size() << " targets; wrote "
                << o.cycle_json << "\n";
      for (const IProMPResult& r : o.results)
        if (!r.ok) std::cout << "  " << r.target_id << " failed: " << r.error << "\n";
    } else {
      throw ValidationError("unknown command: " + command);
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ipromp
