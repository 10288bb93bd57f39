#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ipromp/promp.hpp"
#include "ipromp/scene.hpp"
#include "ipromp/sip.hpp"

namespace ipromp {

// Contact body of the end effector: a solid cone hanging below the controlled
// frame, vertex at the frame origin, widening to `radius` at depth `height`.
struct GripperModel {
  double radius = kGripperMaxRadius;
  double height = 0.04;
};

struct SimParams {
  GripperModel gripper;
  double spring_back_rate = 0.0;  // rad/s relaxation toward rest; 0 holds poses
};

// Signed distance from a point to the cone surface in gripper coordinates;
// negative inside the solid.
double cone_signed_distance(const GripperModel& gripper, const TableTopFrame& frame,
                            const Vec3& gripper_pos, const Vec3& point);

// Outward unit direction from the nearest cone surface point toward `point`.
Vec3 cone_outward_normal(const GripperModel& gripper, const TableTopFrame& frame,
                         const Vec3& gripper_pos, const Vec3& point);

// Raised when no stem rotation of at most pi/2 frees a fruit from the gripper.
struct JamError : NumericalError {
  std::string fruit_id;
  explicit JamError(const std::string& id)
      : NumericalError("simulation jam: fruit " + id + " cannot rotate clear of the gripper"),
        fruit_id(id) {}
};

struct JamInfo {
  std::size_t tick = 0;
  std::string fruit_id;
};

struct SimTrace {
  std::vector<double> times;
  std::vector<Vec3> gripper;
  std::vector<std::string> fruit_ids;
  std::vector<std::vector<Vec3>> fruit_paths;      // [fruit][tick]
  std::vector<std::string> stem_ids;
  std::vector<std::vector<Vec3>> stem_directions;  // [stem][tick]
  std::optional<JamInfo> jam;                      // set when replay aborted early
};

// One quasi-static tick: relax stems toward their rest pose, then rotate any
// hinged fruit out of the gripper body by the minimal stem rotation. Detached
// fruits never move. `rest` supplies the relaxation targets.
void step(ClusterScene& state, const ClusterScene& rest, const Vec3& gripper_pos, double dt,
          const SimParams& params);

// Drive the gripper through the trajectory, stepping the cluster each tick.
// A jam truncates the trace and is reported in `jam`.
SimTrace replay(const ClusterScene& scene, const Trajectory& trajectory,
                const SimParams& params = {});

struct ContactMetric {
  std::string fruit_id;
  bool applicable = false;  // gripper reached the fruit's altitude band
  double h_min = 0.0;       // meters, horizontal frame-to-center distance
  double h_max = 0.0;
  bool contact = false;     // 0 < h_min <= r_g_max + r_f_max
  bool swallowed = false;   // gripper axis reached the fruit center
};

// Horizontal proximity statistics over the ticks where the gripper is within
// the altitude band of each fruit of interest (the target and every pushed
// occluder).
std::vector<ContactMetric> contact_metrics(const SimTrace& trace, const ClusterScene& scene,
                                           const PushPlan& plan);

void write_trace_csv(const SimTrace& trace, const std::string& path);

}  // namespace ipromp
