#pragma once

#include <string>
#include <vector>

#include "ipromp/promp.hpp"
#include "ipromp/scene.hpp"
#include "ipromp/sip.hpp"

namespace ipromp {

enum class WaypointTag {
  previous_goal,      // start of the cycle, end of the previous pick
  below_goal,         // point kApproachDepth under the goal, start of the swallow
  pushable_original,  // occluder pose before its push
  pushable_updated,   // occluder pose after its push, plus the approach shift
  goal
};

std::string to_string(WaypointTag tag);
WaypointTag waypoint_tag_from_string(const std::string& text);

struct ScheduleEntry {
  Waypoint waypoint;
  WaypointTag tag = WaypointTag::goal;
  std::string fruit_id;  // set on pushable entries only
};

struct ConditioningSchedule {
  std::vector<ScheduleEntry> entries;  // strictly increasing times
  double t1 = 0.85;
  double total_T = 2.0;
};

struct SchedulePolicy {
  double t1 = 0.85;
  double total_T = 2.0;
  double below_goal_offset = kApproachDepth;
  // Lateral overshoot added to pushed poses so the gripper shaft, not its
  // center line, clears the fruit.
  double approach_shift = kGripperMaxRadius + kFruitMaxRadius;
  double hard_variance = kHardWaypointVariance;
  bool naive = false;  // condition on unpushed occluder poses, one slot each
};

/// Place the cycle waypoints on a conditioning-time preset: previous goal at
/// 0, below-goal point at t1, per-occluder original/updated poses on interior
/// slots bottom-up, goal at T.
ConditioningSchedule build_schedule(const PushPlan& plan, const Vec3& prev_goal, const Vec3& goal,
                                    const std::vector<double>& preset_times,
                                    const SchedulePolicy& policy = {});

struct IProMPResult {
  bool ok = false;
  std::string error;
  std::string target_id;
  CompositePrimitive primitive;
  ConditioningSchedule schedule;
  TrajectoryDistribution mean_path;
  double planning_time = 0.0;  // seconds
};

/// Condition the two segments through the schedule and return the composed
/// primitive with a dense marginal. The first segment is first translated so
/// its mean starts exactly at the t=0 waypoint, then every waypoint is
/// conditioned on its own segment and the segments are joined at t1.
IProMPResult generate(const ProMPModel& mp1, const ProMPModel& mp2,
                      const ConditioningSchedule& schedule, double sample_rate = 100.0);

/// Plan each ripe target in order; each goal becomes the next start. Failed
/// targets are reported in place and do not advance the start.
std::vector<IProMPResult> pick_cycle(const ProMPModel& mp1, const ProMPModel& mp2,
                                     const ClusterScene& scene,
                                     const std::vector<std::string>& targets, const Vec3& home,
                                     const std::vector<double>& preset_times,
                                     const SchedulePolicy& policy = {},
                                     double sample_rate = 100.0);

Trajectory mean_trajectory(const TrajectoryDistribution& dist);

void write_trajectory_csv(const TrajectoryDistribution& dist, const std::string& path);
TrajectoryDistribution read_trajectory_csv(const std::string& path);

std::string to_json_string(const ConditioningSchedule& schedule);
ConditioningSchedule schedule_from_json_string(const std::string& text);

}  // namespace ipromp
