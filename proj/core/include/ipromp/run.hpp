#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipromp/demos.hpp"
#include "ipromp/iplanner.hpp"
#include "ipromp/promp.hpp"
#include "ipromp/scene.hpp"
#include "ipromp/sim.hpp"
#include "ipromp/sip.hpp"

namespace ipromp {

// One bag of knobs shared by every command; flags and config files both fill
// it in. File fields left empty are derived in memory from the seed.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string scene = "C_IV";  // preset name or scene JSON path
  std::string out_dir = "out";
  std::string target_id = "target";
  std::vector<std::string> targets;  // pick-cycle order; empty: every ripe fruit

  int k1 = 4;
  int k2 = 5;
  double h1 = -1.0;  // <= 0 selects the 1/k^2 default bandwidth
  double h2 = -1.0;
  double lambda = 1e-6;
  double t1 = 0.85;
  double T_total = 2.0;
  std::string tc_preset = "tc1";  // conditioning-time preset: tc1 | tc2
  bool naive = false;             // condition on unpushed occluder poses
  int repeat = 1;                 // latency repetitions for `plan`
  std::string figure = "fig5";    // experiment selector: fig5 | fig6

  DemoGenParams demo;
  int goal_count = 10;

  std::string demos_path;
  std::string model1_path;
  std::string model2_path;
  std::string plan_path;
  std::string trajectory_path;

  // 200 Hz keeps the default 0.425 s zone split on a sample stamp.
  RunConfig() { demo.sample_rate = 200.0; }
};

// Overlay the JSON fields onto `base`; unknown keys are rejected.
RunConfig config_from_json_string(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

Vec3 home_position();
std::vector<Vec3> default_goal_ring(int count);

// Output directory after the PROMP_PUSH_OUT override, created if missing.
std::string resolve_out_dir(const RunConfig& cfg);
ClusterScene resolve_scene(const RunConfig& cfg);
std::vector<double> resolve_tc(const RunConfig& cfg);
DemoSet resolve_demos(const RunConfig& cfg);

// The two trajectory segments are kept unconditioned; `generate` joins them.
struct SegmentModels {
  ProMPModel mp1;
  ProMPModel mp2;
};

SegmentModels train_segments(const DemoSet& set, const RunConfig& cfg);
SegmentModels resolve_models(const RunConfig& cfg);

struct DemoOutcome {
  std::size_t demo_count = 0;
  std::string demos_json;
  std::string demos_csv;
};

struct TrainOutcome {
  std::string model1_json;
  std::string model2_json;
};

struct ExperimentOutcome {
  std::vector<std::string> files;
};

struct PlanOutcome {
  PushPlan plan;
  IProMPResult result;
  double latency_mean = 0.0;  // seconds; reported on stdout only
  double latency_std = 0.0;
  std::string plan_json;
  std::string schedule_json;
  std::string trajectory_csv;
};

struct ReplayOutcome {
  SimTrace trace;
  std::vector<ContactMetric> metrics;
  std::string trace_csv;
  std::string metrics_json;
};

struct CycleOutcome {
  std::vector<IProMPResult> results;
  std::string cycle_json;
  std::vector<std::string> trajectory_csvs;
};

DemoOutcome cmd_demos(const RunConfig& cfg);
TrainOutcome cmd_train(const RunConfig& cfg);
ExperimentOutcome cmd_experiment(const RunConfig& cfg);
PlanOutcome cmd_plan(const RunConfig& cfg);
ReplayOutcome cmd_replay(const RunConfig& cfg);
CycleOutcome cmd_pick_cycle(const RunConfig& cfg);

// Dispatch a command by name, print a one-line summary, and map exceptions to
// process exit codes: 0 ok, 2 validation, 3 numerical, 4 io.
int run_command(const std::string& command, const RunConfig& cfg);

}  // namespace ipromp
