#include "ipromp/iplanner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "ipromp/errors.hpp"
#include "json.hpp"

namespace ipromp {

std::string to_string(WaypointTag tag) {
  switch (tag) {
    case WaypointTag::previous_goal: return "previous_goal";
    case WaypointTag::below_goal: return "below_goal";
    case WaypointTag::pushable_original: return "pushable_original";
    case WaypointTag::pushable_updated: return "pushable_updated";
    case WaypointTag::goal: return "goal";
  }
  throw ValidationError("unknown waypoint tag");
}

WaypointTag waypoint_tag_from_string(const std::string& text) {
  if (text == "previous_goal") return WaypointTag::previous_goal;
  if (text == "below_goal") return WaypointTag::below_goal;
  if (text == "pushable_original") return WaypointTag::pushable_original;
  if (text == "pushable_updated") return WaypointTag::pushable_updated;
  if (text == "goal") return WaypointTag::goal;
  throw ValidationError("unknown waypoint tag: " + text);
}

ConditioningSchedule build_schedule(const PushPlan& plan, const Vec3& prev_goal, const Vec3& goal,
                                    const std::vector<double>& preset_times,
                                    const SchedulePolicy& policy) {
  if (preset_times.size() < 2)
    throw ValidationError("build_schedule: conditioning preset needs at least two times");
  for (std::size_t i = 1; i < preset_times.size(); ++i)
    if (preset_times[i] <= preset_times[i - 1])
      throw ValidationError("build_schedule: preset times must be strictly increasing");
  if (std::abs(preset_times.front()) > 1e-9)
    throw ValidationError("build_schedule: preset must start at t = 0");
  if (std::abs(preset_times.back() - policy.total_T) > 1e-9)
    throw ValidationError("build_schedule: preset must end at the total duration");
  if (!(policy.t1 > 0.0 && policy.t1 < policy.total_T))
    throw ValidationError("build_schedule: t1 must lie inside (0, T)");
  if (!prev_goal.allFinite() || !goal.allFinite())
    throw ValidationError("build_schedule: non-finite goal positions");

  std::vector<double> interior;  // slots strictly between t1 and T
  for (double t : preset_times)
    if (t > policy.t1 + 1e-9 && t < policy.total_T - 1e-9) interior.push_back(t);

  const std::size_t per_directive = policy.naive ? 1 : 2;
  const std::size_t needed = per_directive * plan.directives.size();
  if (needed > interior.size())
    throw ValidationError("build_schedule: plan needs " + std::to_string(needed) +
                          " interior conditioning slots but the preset offers only " +
                          std::to_string(interior.size()) + "; use a denser preset");

  const Vec3 hard = Vec3::Constant(policy.hard_variance);
  ConditioningSchedule schedule;
  schedule.t1 = policy.t1;
  schedule.total_T = policy.total_T;

  schedule.entries.push_back({{0.0, prev_goal, hard}, WaypointTag::previous_goal, {}});
  schedule.entries.push_back(
      {{policy.t1, goal - policy.below_goal_offset * Vec3::UnitZ(), hard},
       WaypointTag::below_goal,
       {}});
  std::size_t slot = 0;
  for (const PushDirective& d : plan.directives) {
    if (!policy.naive) {
      schedule.entries.push_back(
          {{interior[slot++], d.original_position, hard}, WaypointTag::pushable_original,
           d.fruit_id});
      schedule.entries.push_back(
          {{interior[slot++], d.updated_position + policy.approach_shift * d.push_dir, hard},
           WaypointTag::pushable_updated,
           d.fruit_id});
    } else {
      schedule.entries.push_back(
          {{interior[slot++], d.original_position, hard}, WaypointTag::pushable_original,
           d.fruit_id});
    }
  }
  schedule.entries.push_back({{policy.total_T, goal, hard}, WaypointTag::goal, {}});

  for (std::size_t i = 1; i < schedule.entries.size(); ++i)
    if (schedule.entries[i].waypoint.t <= schedule.entries[i - 1].waypoint.t)
      throw ValidationError("build_schedule: produced non-increasing waypoint times");
  return schedule;
}

IProMPResult generate(const ProMPModel& mp1, const ProMPModel& mp2,
                      const ConditioningSchedule& schedule, double sample_rate) {
  mp1.validate();
  mp2.validate();
  if (!(sample_rate > 0.0)) throw ValidationError("generate: sample rate must be positive");
  if (schedule.entries.empty()) throw ValidationError("generate: empty schedule");
  const double t1 = schedule.t1;
  const double T = schedule.total_T;
  if (!(t1 > 0.0 && t1 < T)) throw ValidationError("generate: t1 must lie inside (0, T)");
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const Waypoint& wp = schedule.entries[i].waypoint;
    if (wp.t < 0.0 || wp.t > T + 1e-9)
      throw ValidationError("generate: waypoint time outside [0, T]");
    if (i > 0 && wp.t <= schedule.entries[i - 1].waypoint.t)
      throw ValidationError("generate: waypoint times must be strictly increasing");
  }

  const auto tic = std::chrono::steady_clock::now();
  ProMPModel m1 = mp1;
  ProMPModel m2 = mp2;

  // Re-anchor: demonstrations share one exact start, leaving no variance to
  // condition on at t = 0. A constant weight shift translates the whole mean
  // rigidly (the basis rows sum to one), so the start waypoint is met exactly.
  if (schedule.entries.front().waypoint.t <= 1e-12) {
    const Vec3 delta = schedule.entries.front().waypoint.position - mean_at(m1, 0.0);
    for (int axis = 0; axis < 3; ++axis) {
      m1.mu_w[axis].array() += delta[axis];
      m2.mu_w[axis].array() += delta[axis];
    }
  }

  // Composite time maps onto each segment through its phase, so waypoints are
  // conditioned at segment-native times (segments keep their training spans).
  std::optional<Vec3> junction;
  for (const ScheduleEntry& entry : schedule.entries) {
    const Waypoint& wp = entry.waypoint;
    if (std::abs(wp.t - t1) <= 1e-12) {
      junction = wp.position;  // applied to both segments when composing
      continue;
    }
    if (wp.t < t1)
      m1 = condition(m1, {wp.t / t1 * m1.T, wp.position, wp.variance});
    else
      m2 = condition(m2, {(wp.t - t1) / (T - t1) * m2.T, wp.position, wp.variance});
  }

  CompositePrimitive composite =
      junction ? compose_with_junction(m1, m2, t1, T, *junction) : compose(m1, m2, t1, T);

  std::vector<double> dense;
  const int n = static_cast<int>(std::lround(T * sample_rate));
  dense.reserve(n + 1);
  for (int i = 0; i <= n; ++i) dense.push_back(static_cast<double>(i) / sample_rate);
  dense.back() = T;

  IProMPResult result;
  result.ok = true;
  result.schedule = schedule;
  result.mean_path = marginal(composite, dense);
  result.primitive = std::move(composite);
  result.planning_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();

  for (const ScheduleEntry& entry : schedule.entries) {
    const Vec3 reached = mean_at(result.primitive, entry.waypoint.t);
    const double miss = (reached - entry.waypoint.position).norm();
    if (miss > 1e-4)
      throw NumericalError("generate: mean path misses the " + to_string(entry.tag) +
                           " waypoint at t=" + std::to_string(entry.waypoint.t) + " by " +
                           std::to_string(miss) + " m (insufficient basis rank?)");
  }
  return result;
}

std::vector<IProMPResult> pick_cycle(const ProMPModel& mp1, const ProMPModel& mp2,
                                     const ClusterScene& scene,
                                     const std::vector<std::string>& targets, const Vec3& home,
                                     const std::vector<double>& preset_times,
                                     const SchedulePolicy& policy, double sample_rate) {
  std::vector<IProMPResult> results;
  Vec3 prev = home;
  for (const std::string& id : targets) {
    IProMPResult result;
    result.target_id = id;
    try {
      const Fruit* target = scene.find_fruit(id);
      if (!target) throw ValidationError("pick_cycle: unknown target fruit " + id);
      const PushPlan plan = plan_pushes(scene, id);
      const ConditioningSchedule schedule =
          build_schedule(plan, prev, target->position, preset_times, policy);
      result = generate(mp1, mp2, schedule, sample_rate);
      result.target_id = id;
      prev = target->position;  // the picked goal opens the next cycle
    } catch (const std::exception& e) {
      result.ok = false;
      result.error = e.what();
    }
    results.push_back(std::move(result));
  }
  return results;
}

Trajectory mean_trajectory(const TrajectoryDistribution& dist) {
  Trajectory traj;
  traj.times = dist.times;
  traj.points = dist.mean;
  return traj;
}

void write_trajectory_csv(const TrajectoryDistribution& dist, const std::string& path) {
  if (dist.times.size() != dist.mean.size() || dist.times.size() != dist.variance.size())
    throw ValidationError("write_trajectory_csv: inconsistent column lengths");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "t,x,y,z,var_x,var_y,var_z\n";
  char line[256];
  for (std::size_t i = 0; i < dist.times.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  dist.times[i], dist.mean[i].x(), dist.mean[i].y(), dist.mean[i].z(),
                  dist.variance[i].x(), dist.variance[i].y(), dist.variance[i].z());
    out << line;
  }
  if (!out) throw IoError("write failure: " + path);
}

TrajectoryDistribution read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,z,var_x,var_y,var_z")
    throw IoError("trajectory CSV: unexpected header in " + path);
  TrajectoryDistribution dist;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double v[7];
    char sep = ',';
    for (int i = 0; i < 7; ++i) {
      if (!(row >> v[i])) throw IoError("trajectory CSV: malformed row in " + path);
      if (i < 6 && (!(row >> sep) || sep != ','))
        throw IoError("trajectory CSV: malformed row in " + path);
    }
    dist.times.push_back(v[0]);
    dist.mean.emplace_back(v[1], v[2], v[3]);
    dist.variance.emplace_back(v[4], v[5], v[6]);
  }
  return dist;
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw IoError(std::string("schedule JSON: expected a 3-vector for ") + what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string to_json_string(const ConditioningSchedule& schedule) {
  nlohmann::json j;
  j["t1"] = schedule.t1;
  j["T"] = schedule.total_T;
  j["entries"] = nlohmann::json::array();
  for (const ScheduleEntry& e : schedule.entries) {
    nlohmann::json ej;
    ej["t"] = e.waypoint.t;
    ej["position"] = vec3_json(e.waypoint.position);
    ej["variance"] = vec3_json(e.waypoint.variance);
    ej["tag"] = to_string(e.tag);
    if (!e.fruit_id.empty()) ej["fruit_id"] = e.fruit_id;
    j["entries"].push_back(std::move(ej));
  }
  return j.dump(2);
}

ConditioningSchedule schedule_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("schedule JSON parse failure: ") + e.what());
  }
  try {
    ConditioningSchedule schedule;
    schedule.t1 = j.at("t1").get<double>();
    schedule.total_T = j.at("T").get<double>();
    for (const auto& ej : j.at("entries")) {
      ScheduleEntry e;
      e.waypoint.t = ej.at("t").get<double>();
      e.waypoint.position = vec3_from(ej.at("position"), "position");
      e.waypoint.variance = vec3_from(ej.at("variance"), "variance");
      e.tag = waypoint_tag_from_string(ej.at("tag").get<std::string>());
      if (ej.contains("fruit_id")) e.fruit_id = ej.at("fruit_id").get<std::string>();
      schedule.entries.push_back(std::move(e));
    }
    return schedule;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("schedule JSON structure failure: ") + e.what());
  }
}

}  // namespace ipromp
