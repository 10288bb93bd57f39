#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ipromp/basis.hpp"

namespace ipromp {

inline constexpr double kGripperMaxRadius = 0.03;  // widest gripper cross-section
inline constexpr double kFruitMaxRadius = 0.015;
inline constexpr double kNeighbourRadius = 0.05;   // fixed-radius neighbour ball

struct TableTopFrame {
  Vec3 i = Vec3::UnitX();  // lateral table-top axis
  Vec3 k = Vec3::UnitZ();  // vertical axis
  double plane_z = 0.0;    // height of the rail plane the stems grow from
};

struct Fruit {
  std::string id;
  Vec3 position = Vec3::Zero();
  double radius = kFruitMaxRadius;
  bool ripe = false;
  std::optional<std::string> stem_id;  // empty: detached, immovable in the sim
};

struct Stem {
  std::string id;
  Vec3 root = Vec3::Zero();       // hinge point on the rail plane
  Vec3 direction = Vec3::UnitZ(); // unit vector from root to the fruit center
  double length = 0.1;
};

struct ClusterScene {
  TableTopFrame frame;
  double gripper_radius = kGripperMaxRadius;
  std::vector<Fruit> fruits;
  std::vector<Stem> stems;

  const Fruit* find_fruit(const std::string& id) const;
  const Stem* find_stem(const std::string& id) const;
  void validate() const;
};

std::vector<std::string> preset_names();  // C_I..C_VI, detached_I..detached_III
ClusterScene preset(const std::string& name);

/// All fruits other than the target inside the closed ball of given radius
/// around the target center, in scene order.
std::vector<Fruit> radius_nearest_neighbours(const ClusterScene& scene, const Fruit& target,
                                             double radius);

std::string to_json_string(const ClusterScene& scene);
ClusterScene scene_from_json_string(const std::string& text);
void save_scene(const ClusterScene& scene, const std::string& path);
ClusterScene load_scene(const std::string& path);

}  // namespace ipromp
