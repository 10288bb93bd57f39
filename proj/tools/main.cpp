#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ipromp/errors.hpp"
#include "ipromp/run.hpp"

int main(int argc, char** argv) {
  ipromp::RunConfig cfg;

  // The config file is applied first so that explicit flags override it.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      config_path = arg.substr(9);
  }
  if (!config_path.empty()) {
    try {
      cfg = ipromp::load_config(config_path, cfg);
    } catch (const ipromp::ValidationError& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      return 2;
    } catch (const ipromp::IoError& e) {
      std::cerr << "io error: " << e.what() << "\n";
      return 4;
    }
  }

  CLI::App app{"Push-aware pick planning: learn trajectory primitives from synthetic "
               "demonstrations, condition them through occluder pushes, and replay the "
               "result in a kinematic cluster simulator."};
  app.require_subcommand(1);

  std::string config_echo;  // consumed above; registered so parsing accepts it
  app.add_option("--config", config_echo, "JSON config file; explicit flags override it");

  app.add_option("--seed", cfg.seed, "random seed driving every derived artifact");
  app.add_option("--scene", cfg.scene, "scene preset name or scene JSON path");
  app.add_option("--out", cfg.out_dir, "output directory (PROMP_PUSH_OUT overrides)");
  app.add_option("--target", cfg.target_id, "target fruit id");
  app.add_option("--targets", cfg.targets, "pick-cycle target order")->delimiter(',');
  app.add_option("--k1", cfg.k1, "basis count of the reach segment");
  app.add_option("--k2", cfg.k2, "basis count of the swallow segment");
  app.add_option("--h1", cfg.h1, "basis bandwidth of segment 1 (<=0: 1/k^2)");
  app.add_option("--h2", cfg.h2, "basis bandwidth of segment 2 (<=0: 1/k^2)");
  app.add_option("--lambda", cfg.lambda, "ridge regularizer for weight fitting");
  app.add_option("--t1", cfg.t1, "junction time between the two segments (s)");
  app.add_option("--T", cfg.T_total, "total plan duration (s)");
  app.add_option("--tc-preset", cfg.tc_preset, "conditioning-time preset: tc1 | tc2");
  app.add_flag("--naive", cfg.naive, "condition on unpushed occluder poses");
  app.add_option("--repeat", cfg.repeat, "latency repetitions for plan");
  app.add_option("--figure", cfg.figure, "experiment selector: fig5 | fig6");
  app.add_option("--goal-count", cfg.goal_count, "number of demo goals on the ring");
  app.add_option("--samples", cfg.demo.samples_per_goal, "demonstrations per goal");
  app.add_option("--demo-rate", cfg.demo.sample_rate, "demo sampling rate (Hz)");
  app.add_option("--end-noise", cfg.demo.end_noise_std, "demo end-point noise std (m)");
  app.add_option("--via-count", cfg.demo.via_count, "interior via-points per nominal");
  app.add_option("--swing", cfg.demo.swing_offset, "lateral detour of the nominals (m)");
  app.add_option("--dip", cfg.demo.dip_depth, "depth of the nominals below the goal (m)");
  app.add_option("--via-jitter", cfg.demo.via_jitter_std, "via-point jitter std (m)");
  app.add_option("--demos", cfg.demos_path, "read demonstrations from this JSON file");
  app.add_option("--model1", cfg.model1_path, "read segment-1 model from this JSON file");
  app.add_option("--model2", cfg.model2_path, "read segment-2 model from this JSON file");
  app.add_option("--plan", cfg.plan_path, "read the push plan from this JSON file");
  app.add_option("--trajectory", cfg.trajectory_path, "read the trajectory from this CSV file");

  const std::pair<const char*, const char*> commands[] = {
      {"demos", "synthesize and export the demonstration set"},
      {"train", "fit the two trajectory segments and export them"},
      {"experiment", "run the fig5/fig6 parameter studies"},
      {"plan", "plan pushes and generate the conditioned trajectory"},
      {"replay", "replay a trajectory in the cluster simulator"},
      {"pick-cycle", "chain plans over several targets"},
  };
  for (const auto& [name, description] : commands)
    app.add_subcommand(name, description)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return ipromp::run_command(command, cfg);
}
