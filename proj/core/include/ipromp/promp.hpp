#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ipromp/basis.hpp"
#include "ipromp/demos.hpp"

namespace ipromp {

/// Desired variance attached to hard (position) waypoints.
inline constexpr double kHardWaypointVariance = 1e-10;

/// Discretised conditioning-time presets for the push-to-pick schedule (s).
std::vector<double> tc_preset_1();  // {0, 0.85, 1, 1.3, 1.6, 2}
std::vector<double> tc_preset_2();  // {0, 1.2, 1.4, 1.6, 1.8, 2}

/// Gaussian trajectory primitive: per-axis weight distribution over a shared
/// normalized basis, plus per-axis observation noise.
struct ProMPModel {
  GaussianBasisFamily family;
  double T = 1.0;  // native duration of the training zone
  std::array<Eigen::VectorXd, 3> mu_w;
  std::array<Eigen::MatrixXd, 3> Sigma_w;
  Vec3 Sigma_x = Vec3::Zero();
  void validate() const;
};

struct TrajectoryDistribution {
  std::vector<double> times;
  std::vector<Vec3> mean;
  std::vector<Vec3> variance;  // per-axis marginal variance
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> points;
};

struct Waypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 variance = Vec3::Constant(kHardWaypointVariance);
};

/// Ridge regression of one demonstration onto the basis: per axis,
/// w = (lambda I + Phi^T Phi)^-1 Phi^T x.
std::array<Eigen::VectorXd, 3> fit_weights(const Demonstration& demo,
                                           const GaussianBasisFamily& family,
                                           double T, double lambda);

/// Fit every demo, then take the per-axis weight mean, unbiased weight
/// covariance, and pooled mean squared fit residual as observation noise.
ProMPModel learn(const DemoSet& set, const GaussianBasisFamily& family,
                 double lambda = 1e-6);

TrajectoryDistribution marginal(const ProMPModel& model, const std::vector<double>& times);
Vec3 mean_at(const ProMPModel& model, double t);
Vec3 variance_at(const ProMPModel& model, double t);

/// Gaussian conditioning on one observed waypoint; covariance is symmetrized
/// and eigenvalue-repaired afterwards.
ProMPModel condition(const ProMPModel& model, const Waypoint& wp);
ProMPModel condition_all(const ProMPModel& model, const std::vector<Waypoint>& wps);

Trajectory sample_trajectory(const ProMPModel& model, const std::vector<double>& times,
                             std::uint64_t seed);

/// Two-segment composite: mp1 covers [0, t1) through phase z = t/t1, mp2
/// covers [t1, T] through z = (t - t1)/(T - t1).
struct CompositePrimitive {
  ProMPModel mp1, mp2;
  double t1 = 0.85;
  double T = 2.0;
};

/// Join two primitives, conditioning both on a shared junction waypoint at t1
/// (the average of their junction means).
CompositePrimitive compose(const ProMPModel& mp1, const ProMPModel& mp2, double t1, double T);

/// Same, with an explicit junction point.
CompositePrimitive compose_with_junction(const ProMPModel& mp1, const ProMPModel& mp2,
                                         double t1, double T, const Vec3& junction);

TrajectoryDistribution marginal(const CompositePrimitive& composite,
                                const std::vector<double>& times);
Vec3 mean_at(const CompositePrimitive& composite, double t);
Vec3 variance_at(const CompositePrimitive& composite, double t);
Trajectory sample_trajectory(const CompositePrimitive& composite,
                             const std::vector<double>& times, std::uint64_t seed);

/// Split the demo set at t1_zone (demo seconds), learn both segments, and
/// stretch them over [0, T_total] with the junction at t1.
CompositePrimitive train_composite(const DemoSet& set, int k1, int k2, double h1, double h2,
                                   double lambda, double t1_zone, double t1, double T_total);

std::string to_json_string(const ProMPModel& model);
ProMPModel model_from_json_string(const std::string& text);
void save_model(const ProMPModel& model, const std::string& path);
ProMPModel load_model(const std::string& path);

}  // namespace ipromp
