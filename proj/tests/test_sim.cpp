#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ipromp/sim.hpp"

using namespace ipromp;

namespace {

ClusterScene hinged_scene(double length, const Vec3& direction, double fruit_radius = 0.015) {
  ClusterScene scene;
  Stem stem;
  stem.id = "s";
  stem.root = Vec3::Zero();
  stem.direction = direction.normalized();
  stem.length = length;
  scene.stems.push_back(stem);
  Fruit f;
  f.id = "f";
  f.stem_id = "s";
  f.radius = fruit_radius;
  f.position = stem.root + stem.length * stem.direction;
  scene.fruits.push_back(f);
  return scene;
}

Vec3 rodrigues(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c));
}

}  // namespace

TEST_CASE("cone signed distance against hand-checked points") {
  const GripperModel g;  // radius 0.03, height 0.04
  const TableTopFrame frame;
  const Vec3 vertex(0.0, 0.0, 0.2);

  CHECK(cone_signed_distance(g, frame, vertex, vertex) == doctest::Approx(0.0));
  // Straight below the base disc.
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.0, 0.0, 0.14)) ==
        doctest::Approx(0.02).epsilon(1e-12));
  // Beside the slant, outside.
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.05, 0.0, 0.19)) ==
        doctest::Approx(0.034).epsilon(1e-12));
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.02, 0.0, 0.18)) ==
        doctest::Approx(0.004).epsilon(1e-9));
  // Interior point equidistant from slant and base.
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.01, 0.0, 0.17)) ==
        doctest::Approx(-0.01).epsilon(1e-12));
  // On the base disc and below it off-axis.
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.0, 0.0, 0.16)) == doctest::Approx(0.0));
  CHECK(cone_signed_distance(g, frame, vertex, Vec3(0.01, 0.0, 0.13)) ==
        doctest::Approx(0.03).epsilon(1e-12));

  // The cone follows the frame axis, not the world z axis.
  TableTopFrame tilted;
  tilted.k = Vec3::UnitX();
  tilted.i = Vec3::UnitY();
  CHECK(cone_signed_distance(g, tilted, Vec3(0.2, 0.0, 0.0), Vec3(0.14, 0.0, 0.0)) ==
        doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("outward normal is unit length and increases the distance") {
  const GripperModel g;
  const TableTopFrame frame;
  const Vec3 vertex(0.0, 0.0, 0.2);
  const std::vector<Vec3> probes = {
      {0.05, 0.0, 0.19}, {0.01, 0.0, 0.17},  {0.0, 0.01, 0.13},
      {0.02, 0.02, 0.18}, {-0.01, 0.0, 0.175}, {0.0, 0.0, 0.165},
  };
  for (const Vec3& p : probes) {
    const Vec3 n = cone_outward_normal(g, frame, vertex, p);
    CAPTURE(p.transpose());
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const double before = cone_signed_distance(g, frame, vertex, p);
    const double after = cone_signed_distance(g, frame, vertex, p + 1e-4 * n);
    CHECK(after > before);
  }
}

TEST_CASE("a step without contact leaves the cluster untouched") {
  const ClusterScene rest = hinged_scene(0.1, Vec3::UnitZ());
  ClusterScene state = rest;
  step(state, rest, Vec3(0.5, 0.5, 0.5), 0.01, SimParams{});
  CHECK((state.fruits[0].position - rest.fruits[0].position).norm() == 0.0);
  CHECK((state.stems[0].direction - rest.stems[0].direction).norm() == 0.0);
  CHECK_THROWS_AS(
      step(state, rest, Vec3(std::nan(""), 0.0, 0.0), 0.01, SimParams{}), ValidationError);
}

TEST_CASE("penetrating gripper rotates the stem just clear of its body") {
  const ClusterScene rest = hinged_scene(0.1, Vec3::UnitZ());
  ClusterScene state = rest;
  const SimParams params;
  const Vec3 gripper(0.01, 0.0, 0.11);

  REQUIRE(cone_signed_distance(params.gripper, rest.frame, gripper,
                               rest.fruits[0].position) -
              rest.fruits[0].radius <
          0.0);
  step(state, rest, gripper, 0.01, params);

  // Stem length is conserved and the fruit sits at the stem tip.
  const Stem& stem = state.stems[0];
  const Fruit& fruit = state.fruits[0];
  CHECK(std::abs((fruit.position - stem.root).norm() - 0.1) < 1e-9);
  CHECK((fruit.position - (stem.root + stem.length * stem.direction)).norm() < 1e-12);

  // Post-step clearance sits exactly on the contact boundary.
  const double clearance =
      cone_signed_distance(params.gripper, state.frame, gripper, fruit.position) -
      fruit.radius;
  CHECK(clearance >= 0.0);
  CHECK(clearance < 1e-6);

  // The rotation is minimal along its arc: backing up barely re-penetrates.
  const Vec3 u0 = rest.stems[0].direction;
  const Vec3 u1 = stem.direction;
  const double angle = std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
  CHECK(angle > 1e-4);
  CHECK(angle < M_PI / 2.0 + 1e-12);
  const Vec3 axis = u0.cross(u1).normalized();
  const Vec3 barely = rodrigues(u0, axis, 0.999 * angle);
  const Vec3 barely_pos = stem.root + stem.length * barely;
  CHECK(cone_signed_distance(params.gripper, state.frame, gripper, barely_pos) -
            fruit.radius <
        0.0);

  // A second step with the same gripper pose is a fixed point.
  ClusterScene again = state;
  step(again, rest, gripper, 0.01, params);
  CHECK((again.stems[0].direction - state.stems[0].direction).norm() < 1e-9);
}

TEST_CASE("detached fruits never move") {
  ClusterScene rest;
  Fruit loose;
  loose.id = "d";
  loose.position = Vec3(0.0, 0.0, 0.1);
  rest.fruits.push_back(loose);
  ClusterScene state = rest;
  step(state, rest, Vec3(0.0, 0.0, 0.1), 0.01, SimParams{});  // vertex on the fruit
  CHECK((state.fruits[0].position - loose.position).norm() == 0.0);
}

TEST_CASE("quasi-static hold versus spring-back relaxation") {
  const ClusterScene rest = hinged_scene(0.1, Vec3::UnitZ());

  ClusterScene pushed = rest;
  const Vec3 gripper(0.01, 0.0, 0.11);
  step(pushed, rest, gripper, 0.01, SimParams{});
  const double off0 =
      std::acos(std::clamp(pushed.stems[0].direction.dot(Vec3::UnitZ()), -1.0, 1.0));
  REQUIRE(off0 > 1e-3);

  // Default parameters hold the pose forever once contact is gone.
  ClusterScene held = pushed;
  step(held, rest, Vec3(1.0, 1.0, 1.0), 0.5, SimParams{});
  CHECK((held.stems[0].direction - pushed.stems[0].direction).norm() == 0.0);

  // A positive rate relaxes toward rest by exactly rate * dt radians.
  SimParams springy;
  springy.spring_back_rate = 2.0;
  ClusterScene relaxing = pushed;
  step(relaxing, rest, Vec3(1.0, 1.0, 1.0), 0.01, springy);
  const double off1 =
      std::acos(std::clamp(relaxing.stems[0].direction.dot(Vec3::UnitZ()), -1.0, 1.0));
  CHECK(off1 == doctest::Approx(off0 - 0.02).epsilon(1e-6));
  CHECK((relaxing.fruits[0].position -
         (relaxing.stems[0].root + 0.1 * relaxing.stems[0].direction))
            .norm() < 1e-12);

  // Enough time returns the stem exactly to rest.
  ClusterScene settled = pushed;
  step(settled, rest, Vec3(1.0, 1.0, 1.0), 10.0, springy);
  CHECK((settled.stems[0].direction - Vec3::UnitZ()).norm() < 1e-12);
}

TEST_CASE("an unclearable fruit jams the simulator") {
  // Stem shorter than any clearing rotation: every angle up to pi/2 keeps the
  // fruit inside the inflated cone around a vertex sitting on the fruit.
  const ClusterScene rest = hinged_scene(0.02, Vec3::UnitZ());
  ClusterScene state = rest;
  CHECK_THROWS_AS(step(state, rest, Vec3(0.0, 0.0, 0.02), 0.01, SimParams{}), JamError);

  Trajectory traj;
  traj.times = {0.0, 0.1, 0.2};
  traj.points = {Vec3(0.5, 0.5, 0.5), Vec3(0.0, 0.0, 0.02), Vec3(0.0, 0.0, 0.3)};
  const SimTrace trace = replay(rest, traj);
  REQUIRE(trace.jam.has_value());
  CHECK(trace.jam->tick == 1);
  CHECK(trace.jam->fruit_id == "f");
  CHECK(trace.times.size() == 1);  // truncated at the jam
}

TEST_CASE("replay validates its trajectory and records full histories") {
  const ClusterScene scene = hinged_scene(0.1, Vec3::UnitZ());

  Trajectory bad;
  bad.times = {0.0, 0.1};
  bad.points = {Vec3::Zero()};
  CHECK_THROWS_AS(replay(scene, bad), ValidationError);
  bad.points = {Vec3::Zero(), Vec3(11.0, 0.0, 0.0)};  // outside the workspace
  CHECK_THROWS_AS(replay(scene, bad), ValidationError);
  bad.points = {Vec3::Zero(), Vec3::Ones()};
  bad.times = {0.1, 0.1};
  CHECK_THROWS_AS(replay(scene, bad), ValidationError);
  CHECK_THROWS_AS(replay(scene, Trajectory{}), ValidationError);

  Trajectory far;
  far.times = {0.0, 0.1, 0.2, 0.3};
  far.points = {Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.4, 0.5), Vec3(0.4, 0.4, 0.5),
                Vec3(0.4, 0.4, 0.4)};
  const SimTrace trace = replay(scene, far);
  CHECK(!trace.jam.has_value());
  REQUIRE(trace.times.size() == 4);
  REQUIRE(trace.fruit_ids == std::vector<std::string>{"f"});
  REQUIRE(trace.stem_ids == std::vector<std::string>{"s"});
  for (std::size_t tick = 0; tick < trace.times.size(); ++tick) {
    CHECK((trace.fruit_paths[0][tick] - scene.fruits[0].position).norm() == 0.0);
    CHECK((trace.stem_directions[0][tick] - Vec3::UnitZ()).norm() == 0.0);
    CHECK((trace.gripper[tick] - far.points[tick]).norm() == 0.0);
  }
}

TEST_CASE("contact metrics classify swallowed, contacted, and missed fruits") {
  ClusterScene scene;
  auto add = [&](const std::string& id, const Vec3& pos) {
    Fruit f;
    f.id = id;
    f.position = pos;
    scene.fruits.push_back(f);
  };
  add("target", Vec3(0.0, 0.0, 0.15));
  add("n1", Vec3(0.02, 0.0, 0.12));
  add("far", Vec3(0.2, 0.0, 0.12));
  add("high", Vec3(0.0, 0.0, 0.5));  // the gripper never reaches its band

  SimTrace trace;
  trace.fruit_ids = {"target", "n1", "far", "high"};
  trace.fruit_paths.assign(4, {});
  const std::vector<Vec3> grips = {
      Vec3(0.0, 0.0, 0.3),      // above every band
      Vec3(0.0, 0.0, 0.121),    // n1 band: h = 0.02; far band: h = 0.2
      Vec3(0.001, 0.0, 0.151),  // target band: h = 0.001 (swallowed)
  };
  for (std::size_t tick = 0; tick < grips.size(); ++tick) {
    trace.times.push_back(0.1 * static_cast<double>(tick));
    trace.gripper.push_back(grips[tick]);
    for (std::size_t fi = 0; fi < scene.fruits.size(); ++fi)
      trace.fruit_paths[fi].push_back(scene.fruits[fi].position);
  }

  PushPlan plan;
  plan.target_id = "target";
  PushDirective d;
  d.fruit_id = "n1";
  plan.directives.push_back(d);
  plan.partial = true;
  plan.unhandled = {"far", "high"};

  const std::vector<ContactMetric> metrics = contact_metrics(trace, scene, plan);
  REQUIRE(metrics.size() == 4);

  CHECK(metrics[0].fruit_id == "target");
  CHECK(metrics[0].applicable);
  CHECK(metrics[0].h_min == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(metrics[0].swallowed);
  CHECK(!metrics[0].contact);  // swallowed outranks plain contact

  CHECK(metrics[1].fruit_id == "n1");
  CHECK(metrics[1].applicable);
  CHECK(metrics[1].h_min == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(metrics[1].contact);
  CHECK(!metrics[1].swallowed);

  CHECK(metrics[2].fruit_id == "far");
  CHECK(metrics[2].applicable);
  CHECK(!metrics[2].contact);  // h stays beyond the 0.045 contact radius
  CHECK(metrics[2].h_min == doctest::Approx(0.2).epsilon(1e-12));

  CHECK(metrics[3].fruit_id == "high");
  CHECK(!metrics[3].applicable);
  CHECK(!metrics[3].contact);
  CHECK(!metrics[3].swallowed);

  for (const ContactMetric& m : metrics) CHECK(m.h_min <= m.h_max);

  PushPlan ghost = plan;
  ghost.target_id = "ghost";
  CHECK_THROWS_AS(contact_metrics(trace, scene, ghost), ValidationError);
}

TEST_CASE("trace CSV lists the gripper and every fruit column") {
  const ClusterScene scene = hinged_scene(0.1, Vec3::UnitZ());
  Trajectory traj;
  traj.times = {0.0, 0.1};
  traj.points = {Vec3(0.5, 0.5, 0.5), Vec3(0.4, 0.5, 0.5)};
  const SimTrace trace = replay(scene, traj);

  const std::string path = "test_sim_trace.csv";
  write_trace_csv(trace, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,gripper_x,gripper_y,gripper_z,f_x,f_y,f_z");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  in.close();
  std::remove(path.c_str());
  CHECK_THROWS_AS(write_trace_csv(trace, "/nonexistent/dir/trace.csv"), IoError);
}
