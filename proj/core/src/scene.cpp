#include "ipromp/scene.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace ipromp {

const Fruit* ClusterScene::find_fruit(const std::string& id) const {
  for (const Fruit& f : fruits)
    if (f.id == id) return &f;
  return nullptr;
}

const Stem* ClusterScene::find_stem(const std::string& id) const {
  for (const Stem& s : stems)
    if (s.id == id) return &s;
  return nullptr;
}

void ClusterScene::validate() const {
  if (!(gripper_radius > 0.0))
    throw ValidationError("scene: gripper_radius must be positive");
  if (std::abs(frame.i.norm() - 1.0) > 1e-9 || std::abs(frame.k.norm() - 1.0) > 1e-9)
    throw ValidationError("scene: frame axes must be unit vectors");
  if (std::abs(frame.i.dot(frame.k)) > 1e-9)
    throw ValidationError("scene: frame axes must be orthogonal");

  std::set<std::string> fruit_ids, stem_ids;
  for (const Stem& s : stems) {
    if (s.id.empty() || !stem_ids.insert(s.id).second)
      throw ValidationError("scene: duplicate or empty stem id");
    if (!(s.length > 0.0)) throw ValidationError("scene: stem length must be positive");
    if (std::abs(s.direction.norm() - 1.0) > 1e-9)
      throw ValidationError("scene: stem direction must be a unit vector");
  }
  std::map<std::string, int> stem_use;
  for (const Fruit& f : fruits) {
    if (f.id.empty() || !fruit_ids.insert(f.id).second)
      throw ValidationError("scene: duplicate or empty fruit id");
    if (!(f.radius > 0.0)) throw ValidationError("scene: fruit radius must be positive");
    if (!f.position.allFinite()) throw ValidationError("scene: non-finite fruit position");
    if (f.stem_id) {
      const Stem* stem = find_stem(*f.stem_id);
      if (!stem) throw ValidationError("scene: fruit references unknown stem " + *f.stem_id);
      if (++stem_use[stem->id] > 1)
        throw ValidationError("scene: stem " + stem->id + " referenced by more than one fruit");
      const Vec3 expected = stem->root + stem->length * stem->direction;
      if ((expected - f.position).norm() > 1e-6)
        throw ValidationError("scene: fruit " + f.id + " is not at the tip of stem " + stem->id);
    }
  }
}

namespace {

void add_detached(ClusterScene& scene, const std::string& id, const Vec3& position, bool ripe) {
  Fruit f;
  f.id = id;
  f.position = position;
  f.ripe = ripe;
  scene.fruits.push_back(std::move(f));
}

// Stem hinged at `root`, tilted by `tilt` radians off vertical along +/-i.
void add_attached(ClusterScene& scene, const std::string& id, const Vec3& root, double tilt,
                  double side, double length, bool ripe) {
  Stem stem;
  stem.id = "s_" + id;
  stem.root = root;
  stem.direction = Vec3(side * std::sin(tilt), 0.0, std::cos(tilt));
  stem.length = length;
  Fruit fruit;
  fruit.id = id;
  fruit.position = stem.root + stem.length * stem.direction;
  fruit.ripe = ripe;
  fruit.stem_id = stem.id;
  scene.stems.push_back(std::move(stem));
  scene.fruits.push_back(std::move(fruit));
}

constexpr double kDeg = M_PI / 180.0;

}  // namespace

std::vector<std::string> preset_names() {
  return {"C_I",  "C_II", "C_III",      "C_IV",        "C_V",
          "C_VI", "detached_I", "detached_II", "detached_III"};
}

// All presets share one ripe detached target at (0,0,0.15); neighbour geometry
// realises the six occlusion configurations plus the three detached variants.
ClusterScene preset(const std::string& name) {
  ClusterScene scene;
  const Vec3 root = Vec3::Zero();
  add_detached(scene, "target", Vec3(0.0, 0.0, 0.15), true);

  if (name == "C_I") {  // attached neighbours below the target, distinct heights
    add_attached(scene, "n1", root, 12.0 * kDeg, +1.0, 0.110, false);
    add_attached(scene, "n2", root, 10.0 * kDeg, -1.0, 0.125, false);
  } else if (name == "C_II") {  // attached neighbours above the target
    add_attached(scene, "n1", root, 8.0 * kDeg, +1.0, 0.190, false);
    add_attached(scene, "n2", root, 7.0 * kDeg, -1.0, 0.175, false);
  } else if (name == "C_III") {  // attached neighbours level with the target
    add_attached(scene, "n1", root, std::atan2(0.025, 0.152), +1.0, std::hypot(0.025, 0.152),
                 false);
    add_attached(scene, "n2", root, std::atan2(0.028, 0.149), -1.0, std::hypot(0.028, 0.149),
                 false);
  } else if (name == "C_IV") {  // one stiff inclined stem occluding from below
    add_attached(scene, "n1", root, 10.0 * kDeg, +1.0, 0.120, false);
  } else if (name == "C_V") {  // two stiff occluders below, one per side
    add_attached(scene, "n1", root, 11.0 * kDeg, -1.0, 0.115, false);
    add_attached(scene, "n2", root, 9.0 * kDeg, +1.0, 0.128, false);
  } else if (name == "C_VI") {  // occluders below and above the target
    add_attached(scene, "n1", root, 10.0 * kDeg, +1.0, 0.120, false);
    add_attached(scene, "n2", root, 6.0 * kDeg, -1.0, 0.185, false);
  } else if (name == "detached_I") {  // a single detached occluder: nothing pushable
    add_detached(scene, "d1", Vec3(0.022, 0.0, 0.125), false);
  } else if (name == "detached_II") {
    // Detached and attached occluders at quasi-equal height; the attached stem
    // crosses the approach corridor, so selection falls to the detached fruit.
    add_detached(scene, "d1", Vec3(0.020, 0.0, 0.1224), false);
    add_attached(scene, "n1", root, std::atan2(0.025, 0.1224), +1.0, std::hypot(0.025, 0.1224),
                 false);
  } else if (name == "detached_III") {  // mixed: one pushable stem, one detached occluder
    add_detached(scene, "d1", Vec3(-0.021, 0.0, 0.118), false);
    add_attached(scene, "n1", root, std::atan2(0.024, 0.132), +1.0, std::hypot(0.024, 0.132),
                 false);
  } else {
    throw ValidationError("unknown scene preset: " + name);
  }
  scene.validate();
  return scene;
}

std::vector<Fruit> radius_nearest_neighbours(const ClusterScene& scene, const Fruit& target,
                                             double radius) {
  if (!(radius > 0.0)) throw ValidationError("radius_nearest_neighbours: radius must be positive");
  if (!target.position.allFinite())
    throw ValidationError("radius_nearest_neighbours: non-finite target");
  std::vector<Fruit> out;
  for (const Fruit& f : scene.fruits) {
    if (f.id == target.id) continue;
    if ((f.position - target.position).norm() <= radius) out.push_back(f);
  }
  return out;
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw IoError(std::string("scene JSON: expected a 3-vector for ") + what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string to_json_string(const ClusterScene& scene) {
  nlohmann::json j;
  j["frame"] = {{"i", vec3_json(scene.frame.i)},
                {"k", vec3_json(scene.frame.k)},
                {"plane_z", scene.frame.plane_z}};
  j["gripper_radius"] = scene.gripper_radius;
  j["fruits"] = nlohmann::json::array();
  for (const Fruit& f : scene.fruits) {
    nlohmann::json fj;
    fj["id"] = f.id;
    fj["position"] = vec3_json(f.position);
    fj["radius"] = f.radius;
    fj["ripe"] = f.ripe;
    fj["stem_id"] = f.stem_id ? nlohmann::json(*f.stem_id) : nlohmann::json(nullptr);
    j["fruits"].push_back(std::move(fj));
  }
  j["stems"] = nlohmann::json::array();
  for (const Stem& s : scene.stems) {
    nlohmann::json sj;
    sj["id"] = s.id;
    sj["root"] = vec3_json(s.root);
    sj["direction"] = vec3_json(s.direction);
    sj["length"] = s.length;
    j["stems"].push_back(std::move(sj));
  }
  return j.dump(2);
}

ClusterScene scene_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("scene JSON parse failure: ") + e.what());
  }
  try {
    ClusterScene scene;
    const auto& frame = j.at("frame");
    scene.frame.i = vec3_from(frame.at("i"), "frame.i");
    scene.frame.k = vec3_from(frame.at("k"), "frame.k");
    scene.frame.plane_z = frame.at("plane_z").get<double>();
    scene.gripper_radius = j.at("gripper_radius").get<double>();
    for (const auto& fj : j.at("fruits")) {
      Fruit f;
      f.id = fj.at("id").get<std::string>();
      f.position = vec3_from(fj.at("position"), "fruit position");
      f.radius = fj.at("radius").get<double>();
      f.ripe = fj.at("ripe").get<bool>();
      if (fj.contains("stem_id") && !fj.at("stem_id").is_null())
        f.stem_id = fj.at("stem_id").get<std::string>();
      scene.fruits.push_back(std::move(f));
    }
    for (const auto& sj : j.at("stems")) {
      Stem s;
      s.id = sj.at("id").get<std::string>();
      s.root = vec3_from(sj.at("root"), "stem root");
      s.direction = vec3_from(sj.at("direction"), "stem direction");
      s.length = sj.at("length").get<double>();
      scene.stems.push_back(std::move(s));
    }
    scene.validate();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("scene JSON structure failure: ") + e.what());
  }
}

void save_scene(const ClusterScene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << to_json_string(scene) << '\n';
  if (!out) throw IoError("write failure: " + path);
}

ClusterScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scene_from_json_string(text);
}

}  // namespace ipromp
