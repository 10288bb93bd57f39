#include "ipromp/promp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace ipromp {

std::vector<double> tc_preset_1() { return {0.0, 0.85, 1.0, 1.3, 1.6, 2.0}; }
std::vector<double> tc_preset_2() { return {0.0, 1.2, 1.4, 1.6, 1.8, 2.0}; }

void ProMPModel::validate() const {
  family.validate();
  if (!(T > 0.0)) throw ValidationError("ProMPModel: T must be positive");
  for (int d = 0; d < 3; ++d) {
    if (mu_w[d].size() != family.k)
      throw ValidationError("ProMPModel: mu_w size mismatch");
    if (Sigma_w[d].rows() != family.k || Sigma_w[d].cols() != family.k)
      throw ValidationError("ProMPModel: Sigma_w shape mismatch");
    if (!std::isfinite(Sigma_x[d]) || Sigma_x[d] < 0.0)
      throw ValidationError("ProMPModel: Sigma_x must be finite and non-negative");
  }
}

std::array<Eigen::VectorXd, 3> fit_weights(const Demonstration& demo,
                                           const GaussianBasisFamily& family,
                                           double T, double lambda) {
  family.validate();
  if (demo.times.size() != demo.points.size() || demo.times.empty())
    throw ValidationError("fit_weights: malformed demonstration");
  if (static_cast<int>(demo.times.size()) < family.k)
    throw ValidationError("fit_weights: demonstration has fewer samples than basis functions");
  if (!(lambda >= 0.0)) throw ValidationError("fit_weights: lambda must be >= 0");

  const Eigen::MatrixXd Phi = build_basis_matrix(family, demo.times, T);
  Eigen::MatrixXd A = Phi.transpose() * Phi;
  A.diagonal().array() += lambda;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (!qr.isInvertible())
    throw NumericalError(
        "fit_weights: normal equations are ill-conditioned; use lambda > 0 or fewer bases");

  Eigen::MatrixXd X(demo.points.size(), 3);
  for (std::size_t i = 0; i < demo.points.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = demo.points[i].transpose();
  const Eigen::MatrixXd W = qr.solve(Phi.transpose() * X);  // k x 3

  std::array<Eigen::VectorXd, 3> w;
  for (int d = 0; d < 3; ++d) w[d] = W.col(d);
  return w;
}

ProMPModel learn(const DemoSet& set, const GaussianBasisFamily& family, double lambda) {
  family.validate();
  if (set.demos.size() < 2)
    throw ValidationError("learn: need at least two demonstrations for a weight covariance");

  const auto M = static_cast<Eigen::Index>(set.demos.size());
  std::array<Eigen::MatrixXd, 3> W;  // demo-major weight stacks, M x k
  for (int d = 0; d < 3; ++d) W[d].resize(M, family.k);

  Vec3 residual_sq = Vec3::Zero();
  std::size_t residual_count = 0;
  for (Eigen::Index m = 0; m < M; ++m) {
    const Demonstration& demo = set.demos[static_cast<std::size_t>(m)];
    const auto w = fit_weights(demo, family, set.T, lambda);
    for (int d = 0; d < 3; ++d) W[d].row(m) = w[d].transpose();
    const Eigen::MatrixXd Phi = build_basis_matrix(family, demo.times, set.T);
    for (std::size_t i = 0; i < demo.times.size(); ++i) {
      const Eigen::VectorXd psi = Phi.row(static_cast<Eigen::Index>(i));
      for (int d = 0; d < 3; ++d) {
        const double r = demo.points[i][d] - psi.dot(w[d]);
        residual_sq[d] += r * r;
      }
    }
    residual_count += demo.times.size();
  }

  ProMPModel model;
  model.family = family;
  model.T = set.T;
  model.Sigma_x = residual_sq / static_cast<double>(residual_count);
  for (int d = 0; d < 3; ++d) {
    model.mu_w[d] = W[d].colwise().mean();
    const Eigen::MatrixXd centered = W[d].rowwise() - model.mu_w[d].transpose();
    model.Sigma_w[d] = centered.transpose() * centered / static_cast<double>(M - 1);
  }
  model.validate();
  return model;
}

namespace {

// Per-axis marginal variance psi^T Sigma psi, with the tiny-negative clamp.
double weight_variance(const Eigen::MatrixXd& Sigma, const Eigen::VectorXd& psi) {
  const double q = psi.dot(Sigma * psi);
  if (q < -1e-12)
    throw NumericalError("marginal: weight covariance produced variance below -1e-12");
  return q < 0.0 ? 0.0 : q;
}

}  // namespace

TrajectoryDistribution marginal(const ProMPModel& model, const std::vector<double>& times) {
  model.validate();
  TrajectoryDistribution dist;
  dist.times = times;
  dist.mean.reserve(times.size());
  dist.variance.reserve(times.size());
  for (double t : times) {
    const Eigen::VectorXd psi = eval_gaussian_basis(model.family, phase(t, model.T));
    Vec3 mu, var;
    for (int d = 0; d < 3; ++d) {
      mu[d] = psi.dot(model.mu_w[d]);
      var[d] = weight_variance(model.Sigma_w[d], psi) + model.Sigma_x[d];
    }
    dist.mean.push_back(mu);
    dist.variance.push_back(var);
  }
  return dist;
}

Vec3 mean_at(const ProMPModel& model, double t) {
  const Eigen::VectorXd psi = eval_gaussian_basis(model.family, phase(t, model.T));
  return Vec3(psi.dot(model.mu_w[0]), psi.dot(model.mu_w[1]), psi.dot(model.mu_w[2]));
}

Vec3 variance_at(const ProMPModel& model, double t) {
  const Eigen::VectorXd psi = eval_gaussian_basis(model.family, phase(t, model.T));
  Vec3 var;
  for (int d = 0; d < 3; ++d)
    var[d] = weight_variance(model.Sigma_w[d], psi) + model.Sigma_x[d];
  return var;
}

namespace {

// Symmetrize, then clamp eigenvalues in [-1e-10, 0) to zero. Anything below
// the tolerance means the update itself went wrong, so that is fatal.
Eigen::MatrixXd repair_covariance(const Eigen::MatrixXd& Sigma) {
  Eigen::MatrixXd sym = 0.5 * (Sigma + Sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    throw NumericalError("condition: covariance eigendecomposition failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  bool clamped = false;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -1e-10)
      throw NumericalError("condition: covariance repair found eigenvalue " +
                           std::to_string(lam[i]) + " below -1e-10");
    if (lam[i] < 0.0) {
      lam[i] = 0.0;
      clamped = true;
    }
  }
  if (!clamped) return sym;
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

ProMPModel condition(const ProMPModel& model, const Waypoint& wp) {
  model.validate();
  if (!wp.position.allFinite() || !wp.variance.allFinite())
    throw ValidationError("condition: non-finite waypoint");
  for (int d = 0; d < 3; ++d)
    if (wp.variance[d] < 0.0)
      throw ValidationError("condition: waypoint variance must be >= 0");

  const Eigen::VectorXd psi = eval_gaussian_basis(model.family, phase(wp.t, model.T));
  ProMPModel out = model;
  for (int d = 0; d < 3; ++d) {
    const Eigen::VectorXd Sp = model.Sigma_w[d] * psi;
    const double denom = wp.variance[d] + psi.dot(Sp);
    if (!(denom > 0.0))
      throw NumericalError(
          "condition: singular conditioning, zero prior and zero desired variance");
    const double innovation = wp.position[d] - psi.dot(model.mu_w[d]);
    out.mu_w[d] = model.mu_w[d] + Sp * (innovation / denom);
    out.Sigma_w[d] = repair_covariance(model.Sigma_w[d] - Sp * (Sp.transpose() / denom));
  }
  return out;
}

ProMPModel condition_all(const ProMPModel& model, const std::vector<Waypoint>& wps) {
  ProMPModel out = model;
  for (const Waypoint& wp : wps) out = condition(out, wp);
  return out;
}

namespace {

std::array<Eigen::VectorXd, 3> sample_weights(const ProMPModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<Eigen::VectorXd, 3> w;
  for (int d = 0; d < 3; ++d) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.Sigma_w[d]);
    if (eig.info() != Eigen::Success)
      throw NumericalError("sample_trajectory: covariance eigendecomposition failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam[i] < -1e-10)
        throw NumericalError("sample_trajectory: weight covariance is not positive semidefinite");
      if (lam[i] < 0.0) lam[i] = 0.0;
    }
    Eigen::VectorXd n(model.family.k);
    for (int i = 0; i < model.family.k; ++i) n[i] = normal(rng);
    w[d] = model.mu_w[d] + eig.eigenvectors() * (lam.cwiseSqrt().asDiagonal() * n);
  }
  return w;
}

}  // namespace

Trajectory sample_trajectory(const ProMPModel& model, const std::vector<double>& times,
                             std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  const auto w = sample_weights(model, rng);
  Trajectory traj;
  traj.times = times;
  traj.points.reserve(times.size());
  for (double t : times) {
    const Eigen::VectorXd psi = eval_gaussian_basis(model.family, phase(t, model.T));
    traj.points.emplace_back(psi.dot(w[0]), psi.dot(w[1]), psi.dot(w[2]));
  }
  return traj;
}

CompositePrimitive compose(const ProMPModel& mp1, const ProMPModel& mp2, double t1, double T) {
  const Vec3 junction = 0.5 * (mean_at(mp1, mp1.T) + mean_at(mp2, 0.0));
  return compose_with_junction(mp1, mp2, t1, T, junction);
}

CompositePrimitive compose_with_junction(const ProMPModel& mp1, const ProMPModel& mp2,
                                         double t1, double T, const Vec3& junction) {
  mp1.validate();
  mp2.validate();
  if (!(t1 > 0.0) || !(t1 < T))
    throw ValidationError("compose: need 0 < t1 < T");
  CompositePrimitive composite;
  composite.t1 = t1;
  composite.T = T;
  Waypoint wp_end{mp1.T, junction, Vec3::Constant(kHardWaypointVariance)};
  Waypoint wp_begin{0.0, junction, Vec3::Constant(kHardWaypointVariance)};
  composite.mp1 = condition(mp1, wp_end);
  composite.mp2 = condition(mp2, wp_begin);
  return composite;
}

namespace {

// Map composite time onto (segment model, segment-native time).
std::pair<const ProMPModel*, double> segment_of(const CompositePrimitive& c, double t) {
  if (t < -1e-12 || t > c.T + 1e-12)
    throw ValidationError("composite: time outside [0, T]");
  if (t < c.t1) {
    const double z = t / c.t1;
    return {&c.mp1, z * c.mp1.T};
  }
  const double z = (t - c.t1) / (c.T - c.t1);
  return {&c.mp2, (z > 1.0 ? 1.0 : z) * c.mp2.T};
}

}  // namespace

TrajectoryDistribution marginal(const CompositePrimitive& composite,
                                const std::vector<double>& times) {
  TrajectoryDistribution dist;
  dist.times = times;
  dist.mean.reserve(times.size());
  dist.variance.reserve(times.size());
  for (double t : times) {
    const auto [model, tau] = segment_of(composite, t);
    dist.mean.push_back(mean_at(*model, tau));
    dist.variance.push_back(variance_at(*model, tau));
  }
  return dist;
}

Vec3 mean_at(const CompositePrimitive& composite, double t) {
  const auto [model, tau] = segment_of(composite, t);
  return mean_at(*model, tau);
}

Vec3 variance_at(const CompositePrimitive& composite, double t) {
  const auto [model, tau] = segment_of(composite, t);
  return variance_at(*model, tau);
}

Trajectory sample_trajectory(const CompositePrimitive& composite,
                             const std::vector<double>& times, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto w1 = sample_weights(composite.mp1, rng);
  const auto w2 = sample_weights(composite.mp2, rng);
  Trajectory traj;
  traj.times = times;
  traj.points.reserve(times.size());
  for (double t : times) {
    const auto [model, tau] = segment_of(composite, t);
    const auto& w = (model == &composite.mp1) ? w1 : w2;
    const Eigen::VectorXd psi = eval_gaussian_basis(model->family, phase(tau, model->T));
    traj.points.emplace_back(psi.dot(w[0]), psi.dot(w[1]), psi.dot(w[2]));
  }
  return traj;
}

CompositePrimitive train_composite(const DemoSet& set, int k1, int k2, double h1, double h2,
                                   double lambda, double t1_zone, double t1, double T_total) {
  const DemoSet zone1 = slice_time_zone(set, 0.0, t1_zone);
  const DemoSet zone2 = slice_time_zone(set, t1_zone, set.T);
  const GaussianBasisFamily f1 = (h1 > 0.0) ? GaussianBasisFamily::uniform(k1, h1)
                                            : GaussianBasisFamily::uniform(k1);
  const GaussianBasisFamily f2 = (h2 > 0.0) ? GaussianBasisFamily::uniform(k2, h2)
                                            : GaussianBasisFamily::uniform(k2);
  return compose(learn(zone1, f1, lambda), learn(zone2, f2, lambda), t1, T_total);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string to_json_string(const ProMPModel& model) {
  nlohmann::json j;
  j["k"] = model.family.k;
  j["centers"] = std::vector<double>(model.family.centers.data(),
                                     model.family.centers.data() + model.family.centers.size());
  j["h"] = model.family.h;
  j["T"] = model.T;
  j["mu_w"] = nlohmann::json::array();
  j["Sigma_w"] = nlohmann::json::array();
  j["Sigma_x"] = nlohmann::json{model.Sigma_x[0], model.Sigma_x[1], model.Sigma_x[2]};
  for (int d = 0; d < 3; ++d) {
    j["mu_w"].push_back(std::vector<double>(model.mu_w[d].data(),
                                            model.mu_w[d].data() + model.mu_w[d].size()));
    j["Sigma_w"].push_back(matrix_json(model.Sigma_w[d]));
  }
  return j.dump(2);
}

ProMPModel model_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model JSON parse failure: ") + e.what());
  }
  try {
    ProMPModel model;
    model.family.k = j.at("k").get<int>();
    const auto centers = j.at("centers").get<std::vector<double>>();
    model.family.centers = Eigen::Map<const Eigen::VectorXd>(
        centers.data(), static_cast<Eigen::Index>(centers.size()));
    model.family.h = j.at("h").get<double>();
    model.T = j.at("T").get<double>();
    for (int d = 0; d < 3; ++d) {
      const auto mu = j.at("mu_w").at(d).get<std::vector<double>>();
      model.mu_w[d] =
          Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
      const auto& rows = j.at("Sigma_w").at(d);
      model.Sigma_w[d].resize(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows.at(r).get<std::vector<double>>();
        if (row.size() != rows.size())
          throw IoError("model JSON: Sigma_w is not square");
        for (std::size_t c = 0; c < row.size(); ++c)
          model.Sigma_w[d](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
      model.Sigma_x[d] = j.at("Sigma_x").at(d).get<double>();
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model JSON structure failure: ") + e.what());
  }
}

void save_model(const ProMPModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << to_json_string(model) << '\n';
  if (!out) throw IoError("write failure: " + path);
}

ProMPModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json_string(text);
}

}  // namespace ipromp
