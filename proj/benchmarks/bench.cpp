#include <benchmark/benchmark.h>

#include "ipromp/run.hpp"

namespace {

// The densest stock scenario: two occluders, six-slot preset, eight bases.
ipromp::RunConfig dense_config() {
  ipromp::RunConfig cfg;
  cfg.scene = "C_V";
  cfg.k2 = 8;
  cfg.tc_preset = "tc2";
  cfg.demo.via_count = 8;
  return cfg;
}

}  // namespace

static void BM_ConditionOnce(benchmark::State& state) {
  const ipromp::RunConfig cfg;
  const ipromp::SegmentModels models = ipromp::resolve_models(cfg);
  const ipromp::Waypoint wp{models.mp2.T * 0.5, {0.01, 0.0, 0.12},
                            ipromp::Vec3::Constant(ipromp::kHardWaypointVariance)};
  for (auto _ : state) benchmark::DoNotOptimize(ipromp::condition(models.mp2, wp));
}
BENCHMARK(BM_ConditionOnce);

static void BM_GenerateDense(benchmark::State& state) {
  const ipromp::RunConfig cfg = dense_config();
  const ipromp::ClusterScene scene = ipromp::resolve_scene(cfg);
  const ipromp::SegmentModels models = ipromp::resolve_models(cfg);
  const ipromp::PushPlan plan = ipromp::plan_pushes(scene, cfg.target_id);
  const ipromp::ConditioningSchedule schedule =
      ipromp::build_schedule(plan, ipromp::home_position(),
                             scene.find_fruit(cfg.target_id)->position, ipromp::tc_preset_2());
  for (auto _ : state)
    benchmark::DoNotOptimize(ipromp::generate(models.mp1, models.mp2, schedule));
}
BENCHMARK(BM_GenerateDense)->Unit(benchmark::kMillisecond);

static void BM_ReplayPush(benchmark::State& state) {
  ipromp::RunConfig cfg;  // single-occluder scene, default models
  const ipromp::ClusterScene scene = ipromp::resolve_scene(cfg);
  const ipromp::SegmentModels models = ipromp::resolve_models(cfg);
  const ipromp::PushPlan plan = ipromp::plan_pushes(scene, cfg.target_id);
  const ipromp::ConditioningSchedule schedule =
      ipromp::build_schedule(plan, ipromp::home_position(),
                             scene.find_fruit(cfg.target_id)->position, ipromp::tc_preset_1());
  const ipromp::IProMPResult result = ipromp::generate(models.mp1, models.mp2, schedule);
  const ipromp::Trajectory traj = ipromp::mean_trajectory(result.mean_path);
  for (auto _ : state) benchmark::DoNotOptimize(ipromp::replay(scene, traj));
}
BENCHMARK(BM_ReplayPush)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
