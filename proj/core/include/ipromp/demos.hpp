#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipromp/basis.hpp"

namespace ipromp {

struct Demonstration {
  int nominal_id = 0;
  std::vector<double> times;
  std::vector<Vec3> points;
};

struct DemoSet {
  double T = 1.0;
  Vec3 start = Vec3::Zero();
  std::vector<Vec3> goals;  // one per nominal; reconstructed on load
  std::vector<Demonstration> demos;
};

struct DemoGenParams {
  double T = 1.0;
  int samples_per_goal = 10;
  double sample_rate = 100.0;   // samples per second
  double end_noise_std = 1e-3;  // per-axis std of the end-point perturbation
  double swing_offset = 0.12;   // lateral detour (-y) at mid-descent
  double dip_depth = 0.1;       // depth below the goal at the dip phase
  double dip_phase = 0.425;     // fraction of T at which the path bottoms out
  int via_count = 6;            // interior via-points of each nominal interpolant
  double via_jitter_std = 0.01; // per-nominal via-point jitter, per axis
};

/// Synthesize one cubic-RBF nominal per goal and samples_per_goal noisy copies
/// of each. Every nominal follows a swing-dip-rise reach: it detours laterally
/// while descending, bottoms out dip_depth below the goal at dip_phase, then
/// rises to the goal from directly underneath. The perturbation hits the end
/// point only; interior samples blend linearly in time toward it, so every
/// demo starts at `start` exactly.
DemoSet generate_nominals(const Vec3& start, const std::vector<Vec3>& goals,
                          const DemoGenParams& params, std::uint64_t seed);

/// Piecewise-linear resampling onto n uniform times in [0, T]; endpoints exact.
Demonstration resample(const Demonstration& demo, int n, double T);

/// Restrict every demo to samples with t in [t_lo, t_hi], shifting times to
/// start at 0. The bounds must coincide with sample stamps.
DemoSet slice_time_zone(const DemoSet& set, double t_lo, double t_hi);

std::string to_json_string(const DemoSet& set);
DemoSet demoset_from_json_string(const std::string& text);
void save_demoset(const DemoSet& set, const std::string& path);
DemoSet load_demoset(const std::string& path);

}  // namespace ipromp
