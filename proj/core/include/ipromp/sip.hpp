#pragma once

#include <string>
#include <vector>

#include "ipromp/scene.hpp"

namespace ipromp {

// Vertical tolerance used to group fruits at quasi-equal height.
inline constexpr double kLevelTolerance = 0.005;
// Depth of the vertical approach segment hanging below a picking goal.
inline constexpr double kApproachDepth = 0.1;

// Occluding neighbours partitioned by height relative to the target.
struct OcclusionSubsets {
  std::vector<Fruit> below;
  std::vector<Fruit> level;
  std::vector<Fruit> above;
};

struct StemGeometry {
  double theta0 = 0.0;        // current stem inclination from vertical (rad)
  double theta = 0.0;         // inclination clearing the gripper radius (rad)
  double d_theta = 0.0;       // extra rotation required, clamped at zero
  double displacement = 0.0;  // chord travelled by the fruit centre (m)
};

struct PushDirective {
  std::string fruit_id;
  Vec3 push_dir = Vec3::Zero();
  double d_theta = 0.0;
  double displacement = 0.0;
  Vec3 original_position = Vec3::Zero();
  Vec3 updated_position = Vec3::Zero();
  Vec3 stem_direction = Vec3::UnitZ();
};

struct PushPlan {
  std::string target_id;
  std::vector<PushDirective> directives;  // ordered bottom-up along k
  bool partial = false;                   // some occluder could not be handled
  std::vector<std::string> unhandled;     // ids of occluders without a usable push
};

// Shortest distance between segments [a0,a1] and [b0,b1].
double segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1);

// True when the stem passes within the gripper radius of the vertical
// approach segment ending at the target.
bool stem_occludes_approach(const Stem& stem, const Fruit& target, const ClusterScene& scene);

// Partition a neighbourhood into occluders below / level with / above the
// target; fruits offset more than r_g_max along the table-top axis are dropped.
OcclusionSubsets split_subsets(const std::vector<Fruit>& cluster, const Fruit& target,
                               const TableTopFrame& frame, double r_g_max);

// Reduce the below-target subset: fruits at quasi-equal height are collapsed
// to one representative; level/above subsets are not pushed at all.
std::vector<Fruit> subset_opt(const OcclusionSubsets& subsets, const Fruit& target,
                              const ClusterScene& scene);

// Rotation angle and fruit displacement that swing a hinged stem clear of the
// gripper radius.
StemGeometry stem_geometry(const Stem& stem, const TableTopFrame& frame, double r_g_max);

// Unit pushing direction for one selected fruit: vertical when another
// selected fruit shares its height, otherwise horizontal away from the target.
Vec3 get_dir(const Fruit& fruit, const std::vector<Fruit>& selected, const Fruit& target,
             const TableTopFrame& frame);

// Full pipeline: neighbourhood query, subset split, selection, per-fruit
// geometry and direction, pushed poses.
PushPlan plan_pushes(const ClusterScene& scene, const std::string& target_id);

std::string to_json_string(const PushPlan& plan);
PushPlan plan_from_json_string(const std::string& text);
void save_plan(const PushPlan& plan, const std::string& path);
PushPlan load_plan(const std::string& path);

}  // namespace ipromp
