#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "ipromp/demos.hpp"

using namespace ipromp;

namespace {

const Vec3 kStart(0.0, 0.0, 0.3);
const Vec3 kGoal(0.0, 0.0, 0.15);

DemoGenParams quiet_params() {
  DemoGenParams p;
  p.end_noise_std = 0.0;
  p.via_jitter_std = 0.0;
  p.sample_rate = 100.0;
  return p;
}

}  // namespace

TEST_CASE("every demonstration starts exactly at the shared start") {
  DemoGenParams p;
  p.samples_per_goal = 4;
  const DemoSet set =
      generate_nominals(kStart, {kGoal, Vec3(0.05, 0.02, 0.12)}, p, 31);
  REQUIRE(set.demos.size() == 8);
  for (const Demonstration& d : set.demos) {
    CHECK(d.points.front() == kStart);
    CHECK(d.times.front() == 0.0);
    CHECK(d.times.back() == doctest::Approx(p.T));
    CHECK(d.times.size() == d.points.size());
  }
  CHECK(set.demos[0].nominal_id == 0);
  CHECK(set.demos[7].nominal_id == 1);
}

TEST_CASE("noise-free demonstrations end exactly on the goal and repeat") {
  DemoGenParams p = quiet_params();
  p.samples_per_goal = 3;
  const DemoSet set = generate_nominals(kStart, {kGoal}, p, 5);
  REQUIRE(set.demos.size() == 3);
  for (const Demonstration& d : set.demos) CHECK(d.points.back() == kGoal);
  for (std::size_t i = 0; i < set.demos[0].points.size(); ++i) {
    CHECK(set.demos[0].points[i] == set.demos[1].points[i]);
    CHECK(set.demos[0].points[i] == set.demos[2].points[i]);
  }
}

TEST_CASE("nominal path swings sideways and dips below the goal") {
  DemoGenParams p = quiet_params();
  p.samples_per_goal = 1;
  const DemoSet set = generate_nominals(kStart, {kGoal}, p, 2);
  const Demonstration& d = set.demos[0];

  double min_y = 0.0, min_z = 1.0;
  for (const Vec3& pt : d.points) {
    min_y = std::min(min_y, pt.y());
    min_z = std::min(min_z, pt.z());
  }
  CHECK(min_y < -0.05);                      // lateral detour on the way down
  CHECK(min_z < kGoal.z() - 0.04);           // bottoms out below the goal
  CHECK(min_z > kGoal.z() - p.dip_depth - 0.05);

  // Final approach comes from underneath: late samples hug the goal axis,
  // with a small interpolation overshoot allowed past the goal height.
  for (std::size_t i = d.points.size() - 5; i < d.points.size(); ++i) {
    CHECK(std::abs(d.points[i].x() - kGoal.x()) < 0.02);
    CHECK(std::abs(d.points[i].y() - kGoal.y()) < 0.02);
    CHECK(d.points[i].z() < kGoal.z() + 0.002);
  }
}

TEST_CASE("same seed reproduces the demo set byte for byte") {
  DemoGenParams p;
  p.samples_per_goal = 2;
  const DemoSet a = generate_nominals(kStart, {kGoal, Vec3(0.1, -0.1, 0.2)}, p, 99);
  const DemoSet b = generate_nominals(kStart, {kGoal, Vec3(0.1, -0.1, 0.2)}, p, 99);
  CHECK(to_json_string(a) == to_json_string(b));
  const DemoSet c = generate_nominals(kStart, {kGoal, Vec3(0.1, -0.1, 0.2)}, p, 100);
  CHECK(to_json_string(a) != to_json_string(c));
}

TEST_CASE("end-point noise has the configured scale and blends linearly in time") {
  DemoGenParams quiet = quiet_params();
  quiet.samples_per_goal = 400;
  DemoGenParams noisy = quiet;
  noisy.end_noise_std = 1e-3;

  // Identical seeds consume the generator identically, so the noisy set is the
  // quiet set plus its per-demo end perturbation blended linearly in time.
  const DemoSet base = generate_nominals(kStart, {kGoal}, quiet, 123);
  const DemoSet jit = generate_nominals(kStart, {kGoal}, noisy, 123);
  REQUIRE(base.demos.size() == jit.demos.size());

  Vec3 sum = Vec3::Zero(), sum_sq = Vec3::Zero();
  for (std::size_t m = 0; m < jit.demos.size(); ++m) {
    const Demonstration& q = base.demos[m];
    const Demonstration& n = jit.demos[m];
    const Vec3 delta = n.points.back() - kGoal;
    sum += delta;
    sum_sq += delta.cwiseProduct(delta);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const double s = q.times[i] / quiet.T;
      const Vec3 expected = q.points[i] + s * delta;
      CHECK((n.points[i] - expected).norm() < 1e-12);
    }
  }
  const double count = static_cast<double>(jit.demos.size());
  for (int axis = 0; axis < 3; ++axis) {
    const double mean = sum[axis] / count;
    const double var = sum_sq[axis] / count - mean * mean;
    CHECK(std::abs(mean) < 2.5e-4);
    CHECK(std::sqrt(var) == doctest::Approx(1e-3).epsilon(0.15));
  }
}

TEST_CASE("generation rejects malformed parameters") {
  DemoGenParams p;
  CHECK_THROWS_AS(generate_nominals(kStart, {}, p, 1), ValidationError);
  CHECK_THROWS_AS(generate_nominals(kStart, {kStart}, p, 1), ValidationError);

  DemoGenParams bad = p;
  bad.samples_per_goal = 0;
  CHECK_THROWS_AS(generate_nominals(kStart, {kGoal}, bad, 1), ValidationError);
  bad = p;
  bad.sample_rate = 150.3;  // sample_rate * T not an integer step count
  CHECK_THROWS_AS(generate_nominals(kStart, {kGoal}, bad, 1), ValidationError);
  bad = p;
  bad.end_noise_std = -1e-3;
  CHECK_THROWS_AS(generate_nominals(kStart, {kGoal}, bad, 1), ValidationError);
  bad = p;
  bad.dip_phase = 1.0;
  CHECK_THROWS_AS(generate_nominals(kStart, {kGoal}, bad, 1), ValidationError);
  bad = p;
  bad.dip_depth = -0.01;
  CHECK_THROWS_AS(generate_nominals(kStart, {kGoal}, bad, 1), ValidationError);
}

TEST_CASE("resampling keeps endpoints and straight lines exact") {
  Demonstration line;
  line.times = {0.0, 0.4, 1.0};
  line.points = {Vec3(0, 0, 0), Vec3(0.4, 0.8, -0.4), Vec3(1.0, 2.0, -1.0)};

  const Demonstration two = resample(line, 2, 1.0);
  CHECK(two.points.front() == line.points.front());
  CHECK(two.points.back() == line.points.back());

  const Demonstration dense = resample(line, 101, 1.0);
  for (std::size_t i = 0; i < dense.times.size(); ++i) {
    const double t = dense.times[i];
    CHECK((dense.points[i] - Vec3(t, 2.0 * t, -t)).norm() < 1e-12);
  }

  // Resampling onto the grid the demo already uses is the identity.
  DemoGenParams p = quiet_params();
  p.samples_per_goal = 1;
  const Demonstration demo = generate_nominals(kStart, {kGoal}, p, 7).demos[0];
  const Demonstration same =
      resample(demo, static_cast<int>(demo.times.size()), p.T);
  for (std::size_t i = 0; i < demo.times.size(); ++i)
    CHECK((same.points[i] - demo.points[i]).norm() < 1e-12);

  CHECK_THROWS_AS(resample(line, 1, 1.0), ValidationError);
  CHECK_THROWS_AS(resample(line, 10, 0.0), ValidationError);
  Demonstration broken = line;
  broken.points.pop_back();
  CHECK_THROWS_AS(resample(broken, 10, 1.0), ValidationError);
}

TEST_CASE("time-zone slicing keeps boundary samples in both zones") {
  DemoGenParams p = quiet_params();
  p.sample_rate = 200.0;
  p.samples_per_goal = 2;
  const DemoSet set = generate_nominals(kStart, {kGoal}, p, 11);

  const DemoSet head = slice_time_zone(set, 0.0, 0.425);
  const DemoSet tail = slice_time_zone(set, 0.425, 1.0);
  CHECK(head.T == doctest::Approx(0.425));
  CHECK(tail.T == doctest::Approx(0.575));
  for (std::size_t m = 0; m < set.demos.size(); ++m) {
    const Demonstration& h = head.demos[m];
    const Demonstration& t = tail.demos[m];
    CHECK(h.times.front() == doctest::Approx(0.0));
    CHECK(h.times.back() == doctest::Approx(0.425));
    CHECK(t.times.front() == doctest::Approx(0.0));
    CHECK(t.times.back() == doctest::Approx(0.575));
    CHECK(h.times.size() + t.times.size() == set.demos[m].times.size() + 1);
    // The junction sample appears in both zones.
    CHECK((h.points.back() - t.points.front()).norm() == 0.0);
  }

  CHECK_THROWS_AS(slice_time_zone(set, 0.0, 0.4251), ValidationError);
  CHECK_THROWS_AS(slice_time_zone(set, -0.1, 0.5), ValidationError);
  CHECK_THROWS_AS(slice_time_zone(set, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(slice_time_zone(set, 0.0, 1.5), ValidationError);
}

TEST_CASE("demo set survives a JSON round trip") {
  DemoGenParams p = quiet_params();
  p.samples_per_goal = 2;
  const DemoSet set = generate_nominals(kStart, {kGoal, Vec3(0.06, 0.01, 0.13)}, p, 21);

  const std::string text = to_json_string(set);
  const DemoSet back = demoset_from_json_string(text);
  CHECK(to_json_string(back) == text);
  REQUIRE(back.goals.size() == 2);
  // Noise-free ends let the loader rebuild the goals exactly.
  CHECK((back.goals[0] - kGoal).norm() == 0.0);
  CHECK((back.goals[1] - Vec3(0.06, 0.01, 0.13)).norm() == 0.0);

  CHECK_THROWS_AS(demoset_from_json_string("not json"), IoError);
  CHECK_THROWS_AS(demoset_from_json_string("{}"), IoError);
  CHECK_THROWS_AS(load_demoset("/nonexistent/demos.json"), IoError);
}
