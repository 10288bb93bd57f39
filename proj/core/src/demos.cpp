#include "ipromp/demos.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace ipromp {

namespace {

// Interpolation nodes of one nominal: start, via_count interior points, goal.
struct NominalCurve {
  CubicRBFFamily family;             // node phases double as RBF centers
  Eigen::Matrix<double, Eigen::Dynamic, 3> coeffs;

  Vec3 at(double s) const {
    Eigen::VectorXd b = eval_cubic_rbf(family, s);
    return (coeffs.transpose() * b).eval();
  }
};

NominalCurve fit_nominal(const Vec3& start, const Vec3& goal,
                         const std::vector<Vec3>& vias,
                         const std::vector<double>& via_phases) {
  const int n = 2 + static_cast<int>(vias.size());
  NominalCurve curve;
  curve.family.centers.resize(n);
  curve.family.centers[0] = 0.0;
  for (std::size_t j = 0; j < via_phases.size(); ++j)
    curve.family.centers[static_cast<Eigen::Index>(j) + 1] = via_phases[j];
  curve.family.centers[n - 1] = 1.0;

  Eigen::MatrixXd Phi(n, n);
  Eigen::Matrix<double, Eigen::Dynamic, 3> rhs(n, 3);
  rhs.row(0) = start.transpose();
  for (std::size_t j = 0; j < vias.size(); ++j)
    rhs.row(static_cast<Eigen::Index>(j) + 1) = vias[j].transpose();
  rhs.row(n - 1) = goal.transpose();
  for (int i = 0; i < n; ++i)
    Phi.row(i) = eval_cubic_rbf(curve.family, curve.family.centers[i]).transpose();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
  if (!qr.isInvertible())
    throw NumericalError("generate_nominals: singular cubic-RBF interpolation system");
  curve.coeffs = qr.solve(rhs);
  return curve;
}

}  // namespace

DemoSet generate_nominals(const Vec3& start, const std::vector<Vec3>& goals,
                          const DemoGenParams& params, std::uint64_t seed) {
  if (goals.empty()) throw ValidationError("generate_nominals: need at least one goal");
  if (!(params.T > 0.0)) throw ValidationError("generate_nominals: T must be positive");
  if (params.samples_per_goal < 1)
    throw ValidationError("generate_nominals: samples_per_goal must be >= 1");
  if (!(params.sample_rate > 0.0))
    throw ValidationError("generate_nominals: sample_rate must be positive");
  if (params.via_count < 0 || params.end_noise_std < 0.0 || params.via_jitter_std < 0.0)
    throw ValidationError("generate_nominals: negative noise parameter");
  if (!(params.dip_phase > 0.0) || !(params.dip_phase < 1.0))
    throw ValidationError("generate_nominals: dip_phase must lie in (0, 1)");
  if (!(params.dip_depth >= 0.0))
    throw ValidationError("generate_nominals: dip_depth must be non-negative");
  if (!start.allFinite()) throw ValidationError("generate_nominals: non-finite start");

  const double steps_real = params.sample_rate * params.T;
  const int steps = static_cast<int>(std::llround(steps_real));
  if (steps < 1 || std::abs(steps_real - steps) > 1e-9)
    throw ValidationError("generate_nominals: sample_rate * T must be a positive integer");
  const int n_samples = steps + 1;

  std::vector<double> times(n_samples);
  for (int i = 0; i < n_samples; ++i) times[i] = params.T * i / steps;

  std::vector<double> via_phases(params.via_count);
  for (int j = 0; j < params.via_count; ++j)
    via_phases[j] = static_cast<double>(j + 1) / (params.via_count + 1);

  DemoSet set;
  set.T = params.T;
  set.start = start;
  set.goals = goals;
  set.demos.reserve(goals.size() * static_cast<std::size_t>(params.samples_per_goal));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t g = 0; g < goals.size(); ++g) {
    const Vec3& goal = goals[g];
    if (!goal.allFinite()) throw ValidationError("generate_nominals: non-finite goal");
    if ((goal - start).norm() < 1e-9)
      throw ValidationError("generate_nominals: goal coincides with start, degenerate trajectory");

    // Swing-dip-rise reach template: detour sideways on the way down, bottom
    // out below the goal, then rise to it from directly underneath.
    const Vec3 dip = goal - params.dip_depth * Vec3::UnitZ();
    const std::vector<double> anchor_phases = {
        0.0, 0.5 * params.dip_phase, params.dip_phase,
        params.dip_phase + 0.55 * (1.0 - params.dip_phase), 1.0};
    const std::vector<Vec3> anchors = {
        start, 0.5 * (start + dip) - params.swing_offset * Vec3::UnitY(), dip,
        goal - 0.4 * params.dip_depth * Vec3::UnitZ(), goal};
    NominalCurve shape = fit_nominal(anchors.front(), anchors.back(),
                                     {anchors.begin() + 1, anchors.end() - 1},
                                     {anchor_phases.begin() + 1, anchor_phases.end() - 1});

    std::vector<Vec3> vias(via_phases.size());
    for (std::size_t j = 0; j < via_phases.size(); ++j) {
      Vec3 jitter(normal(rng), normal(rng), normal(rng));
      vias[j] = shape.at(via_phases[j]) + params.via_jitter_std * jitter;
    }
    NominalCurve curve = fit_nominal(start, goal, vias, via_phases);

    for (int m = 0; m < params.samples_per_goal; ++m) {
      Vec3 delta(normal(rng), normal(rng), normal(rng));
      delta *= params.end_noise_std;
      Demonstration demo;
      demo.nominal_id = static_cast<int>(g);
      demo.times = times;
      demo.points.resize(times.size());
      demo.points.front() = start;
      demo.points.back() = goal + delta;
      for (int i = 1; i + 1 < n_samples; ++i) {
        const double s = times[i] / params.T;
        demo.points[static_cast<std::size_t>(i)] = curve.at(s) + s * delta;
      }
      set.demos.push_back(std::move(demo));
    }
  }
  return set;
}

Demonstration resample(const Demonstration& demo, int n, double T) {
  if (n < 2) throw ValidationError("resample: need n >= 2");
  if (demo.times.size() < 2 || demo.times.size() != demo.points.size())
    throw ValidationError("resample: malformed demonstration");
  if (!(T > 0.0)) throw ValidationError("resample: T must be positive");

  Demonstration out;
  out.nominal_id = demo.nominal_id;
  out.times.resize(static_cast<std::size_t>(n));
  out.points.resize(static_cast<std::size_t>(n));
  out.points.front() = demo.points.front();
  out.points.back() = demo.points.back();
  for (int i = 0; i < n; ++i) out.times[static_cast<std::size_t>(i)] = T * i / (n - 1);

  std::size_t seg = 0;
  for (int i = 1; i + 1 < n; ++i) {
    const double t = out.times[static_cast<std::size_t>(i)];
    while (seg + 2 < demo.times.size() && demo.times[seg + 1] < t) ++seg;
    const double t0 = demo.times[seg], t1 = demo.times[seg + 1];
    const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
    out.points[static_cast<std::size_t>(i)] =
        (1.0 - w) * demo.points[seg] + w * demo.points[seg + 1];
  }
  return out;
}

DemoSet slice_time_zone(const DemoSet& set, double t_lo, double t_hi) {
  if (!(t_lo >= 0.0) || !(t_hi <= set.T + 1e-9) || !(t_hi > t_lo))
    throw ValidationError("slice_time_zone: need 0 <= t_lo < t_hi <= T");
  DemoSet out;
  out.T = t_hi - t_lo;
  out.start = set.start;
  out.goals = set.goals;
  out.demos.reserve(set.demos.size());
  for (const Demonstration& demo : set.demos) {
    Demonstration cut;
    cut.nominal_id = demo.nominal_id;
    bool lo_hit = false, hi_hit = false;
    for (std::size_t i = 0; i < demo.times.size(); ++i) {
      const double t = demo.times[i];
      if (t < t_lo - 1e-9 || t > t_hi + 1e-9) continue;
      lo_hit |= std::abs(t - t_lo) <= 1e-9;
      hi_hit |= std::abs(t - t_hi) <= 1e-9;
      cut.times.push_back(t - t_lo);
      cut.points.push_back(demo.points[i]);
    }
    if (!lo_hit || !hi_hit)
      throw ValidationError("slice_time_zone: zone bounds must coincide with sample stamps");
    out.demos.push_back(std::move(cut));
  }
  return out;
}

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw IoError(std::string("demo set JSON: expected a 3-vector for ") + what);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string to_json_string(const DemoSet& set) {
  nlohmann::json j;
  j["T"] = set.T;
  j["start"] = vec3_json(set.start);
  j["demos"] = nlohmann::json::array();
  for (const Demonstration& demo : set.demos) {
    nlohmann::json d;
    d["nominal_id"] = demo.nominal_id;
    d["times"] = demo.times;
    d["points"] = nlohmann::json::array();
    for (const Vec3& p : demo.points) d["points"].push_back(vec3_json(p));
    j["demos"].push_back(std::move(d));
  }
  return j.dump(2);
}

DemoSet demoset_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("demo set JSON parse failure: ") + e.what());
  }
  try {
    DemoSet set;
    set.T = j.at("T").get<double>();
    set.start = vec3_from(j.at("start"), "start");
    for (const auto& d : j.at("demos")) {
      Demonstration demo;
      demo.nominal_id = d.at("nominal_id").get<int>();
      demo.times = d.at("times").get<std::vector<double>>();
      for (const auto& p : d.at("points")) demo.points.push_back(vec3_from(p, "point"));
      if (demo.times.size() != demo.points.size())
        throw IoError("demo set JSON: times/points length mismatch");
      set.demos.push_back(std::move(demo));
    }
    // Goals are not serialized; rebuild them as the per-nominal mean end point.
    int max_id = -1;
    for (const Demonstration& d : set.demos) max_id = std::max(max_id, d.nominal_id);
    if (max_id >= 0) {
      std::vector<Vec3> sums(static_cast<std::size_t>(max_id) + 1, Vec3::Zero());
      std::vector<int> counts(static_cast<std::size_t>(max_id) + 1, 0);
      for (const Demonstration& d : set.demos) {
        if (d.nominal_id < 0) throw IoError("demo set JSON: negative nominal_id");
        if (!d.points.empty()) {
          sums[static_cast<std::size_t>(d.nominal_id)] += d.points.back();
          counts[static_cast<std::size_t>(d.nominal_id)] += 1;
        }
      }
      for (std::size_t g = 0; g < sums.size(); ++g)
        set.goals.push_back(counts[g] > 0 ? Vec3(sums[g] / counts[g]) : Vec3::Zero());
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("demo set JSON structure failure: ") + e.what());
  }
}

void save_demoset(const DemoSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << to_json_string(set) << '\n';
  if (!out) throw IoError("write failure: " + path);
}

DemoSet load_demoset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return demoset_from_json_string(text);
}

}  // namespace ipromp
