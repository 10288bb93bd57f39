#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ipromp/scene.hpp"
#include "ipromp/sip.hpp"

using namespace ipromp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("all presets exist, validate, and contain one ripe target") {
  const std::vector<std::string> names = preset_names();
  CHECK(names == std::vector<std::string>{"C_I", "C_II", "C_III", "C_IV", "C_V", "C_VI",
                                          "detached_I", "detached_II", "detached_III"});
  for (const std::string& name : names) {
    const ClusterScene scene = preset(name);
    CAPTURE(name);
    CHECK_NOTHROW(scene.validate());
    const Fruit* target = scene.find_fruit("target");
    REQUIRE(target != nullptr);
    CHECK(target->ripe);
    CHECK(!target->stem_id.has_value());  // ripe fruits detach before picking
    CHECK(scene.gripper_radius == doctest::Approx(kGripperMaxRadius));
    // Stems grow from the rail plane within their documented length band.
    for (const Stem& s : scene.stems) {
      CHECK(std::abs(scene.frame.k.dot(s.root) - scene.frame.plane_z) < 1e-12);
      CHECK(s.length >= 0.08);
      CHECK(s.length <= 0.2);
    }
  }
  CHECK_THROWS_AS(preset("C_VII"), ValidationError);
}

TEST_CASE("presets are deterministic and match the committed JSON files") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    CHECK(to_json_string(preset(name)) == to_json_string(preset(name)));
    const std::string committed = read_file(std::string(IPROMP_PRESET_DIR) + "/" + name + ".json");
    CHECK(to_json_string(preset(name)) + "\n" == committed);
  }
}

TEST_CASE("occluder layout of the six attached-cluster presets") {
  for (const std::string& name : {"C_I", "C_IV", "C_V", "C_VI"}) {
    const ClusterScene scene = preset(name);
    const Fruit* target = scene.find_fruit("target");
    CAPTURE(name);
    int below = 0;
    for (const Fruit& f : scene.fruits) {
      if (f.id == "target") continue;
      CHECK(!f.ripe);
      if (scene.frame.k.dot(f.position - target->position) < -kLevelTolerance) ++below;
    }
    CHECK(below >= 1);
  }
  CHECK(preset("C_I").fruits.size() == 3);
  CHECK(preset("C_IV").fruits.size() == 2);
  CHECK(preset("C_V").fruits.size() == 3);
  CHECK(preset("C_VI").fruits.size() == 3);

  // The single C_IV occluder hangs from a stiff inclined stem.
  const ClusterScene c4 = preset("C_IV");
  REQUIRE(c4.stems.size() == 1);
  CHECK(std::abs(c4.stems[0].direction.dot(c4.frame.k)) < 1.0 - 1e-6);

  // C_II keeps both neighbours above the target; nothing hangs below.
  const ClusterScene c2 = preset("C_II");
  const Fruit* c2_target = c2.find_fruit("target");
  for (const Fruit& f : c2.fruits)
    if (f.id != "target")
      CHECK(c2.frame.k.dot(f.position - c2_target->position) > kLevelTolerance);

  // The detached presets carry unhandleable occluders.
  for (const std::string& name : {"detached_I", "detached_II", "detached_III"}) {
    const ClusterScene scene = preset(name);
    bool has_detached_occluder = false;
    for (const Fruit& f : scene.fruits)
      if (f.id != "target" && !f.stem_id) has_detached_occluder = true;
    CAPTURE(name);
    CHECK(has_detached_occluder);
  }
}

TEST_CASE("fixed-radius neighbourhood query uses a closed ball") {
  ClusterScene scene;
  Fruit target;
  target.id = "target";
  target.position = Vec3(0.0, 0.0, 0.15);
  target.ripe = true;
  scene.fruits.push_back(target);

  auto add = [&](const std::string& id, const Vec3& pos) {
    Fruit f;
    f.id = id;
    f.position = pos;
    scene.fruits.push_back(f);
  };
  add("inside", Vec3(0.02, 0.01, 0.13));
  add("boundary", Vec3(0.05, 0.0, 0.15));     // exactly at radius: included
  add("outside", Vec3(0.0, 0.0, 0.2001));
  add("far", Vec3(0.3, 0.0, 0.0));

  const std::vector<Fruit> near = radius_nearest_neighbours(scene, scene.fruits[0], 0.05);
  REQUIRE(near.size() == 2);
  CHECK(near[0].id == "inside");  // scene order is preserved
  CHECK(near[1].id == "boundary");

  CHECK_THROWS_AS(radius_nearest_neighbours(scene, scene.fruits[0], 0.0), ValidationError);

  const ClusterScene lonely = [&] {
    ClusterScene s;
    s.fruits.push_back(target);
    return s;
  }();
  CHECK(radius_nearest_neighbours(lonely, lonely.fruits[0], 0.05).empty());
}

TEST_CASE("scene validation rejects inconsistent structures") {
  ClusterScene scene = preset("C_IV");
  scene.gripper_radius = 0.0;
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  scene.frame.i = Vec3(0.5, 0.0, 0.0);  // not unit
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  scene.frame.i = Vec3::UnitZ();  // parallel axes
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  scene.fruits.push_back(scene.fruits.front());  // duplicate id
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  scene.stems.front().direction *= 2.0;
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  scene.stems.front().length = -0.1;
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  for (Fruit& f : scene.fruits)
    if (f.stem_id) f.position += Vec3(0.01, 0.0, 0.0);  // off the stem tip
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = preset("C_IV");
  for (Fruit& f : scene.fruits)
    if (f.stem_id) *f.stem_id = "ghost";  // unknown stem
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  // One stem feeding two fruits is rejected.
  scene = preset("C_IV");
  Fruit clone;
  clone.id = "clone";
  clone.stem_id = scene.stems.front().id;
  clone.position = scene.stems.front().root +
                   scene.stems.front().length * scene.stems.front().direction;
  scene.fruits.push_back(clone);
  CHECK_THROWS_AS(scene.validate(), ValidationError);
}

TEST_CASE("scene survives a JSON round trip") {
  for (const std::string& name : preset_names()) {
    const ClusterScene scene = preset(name);
    const std::string text = to_json_string(scene);
    const ClusterScene back = scene_from_json_string(text);
    CHECK_NOTHROW(back.validate());
    CHECK(to_json_string(back) == text);
  }
  CHECK_THROWS_AS(scene_from_json_string("nope"), IoError);
  CHECK_THROWS_AS(scene_from_json_string("{\"fruits\": 3}"), IoError);
  CHECK_THROWS_AS(load_scene("/nonexistent/scene.json"), IoError);
}
