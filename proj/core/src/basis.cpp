#include "ipromp/basis.hpp"

#include <cmath>
#include <string>

namespace ipromp {

double phase(double t, double total_duration) {
  if (!std::isfinite(t) || !std::isfinite(total_duration) || total_duration <= 0.0)
    throw ValidationError("phase: need finite t and total_duration > 0");
  if (t < -1e-12 || t > total_duration + 1e-12)
    throw ValidationError("phase: t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(total_duration) + "]");
  double z = t / total_duration;
  return z < 0.0 ? 0.0 : (z > 1.0 ? 1.0 : z);
}

double gaussian_rbf(double z, double c, double h) {
  if (!std::isfinite(z) || !std::isfinite(c) || !(h > 0.0))
    throw ValidationError("gaussian_rbf: need finite z, c and h > 0");
  const double d = z - c;
  return std::exp(-d * d / (2.0 * h));
}

GaussianBasisFamily GaussianBasisFamily::uniform(int k) {
  if (k < 1) throw ValidationError("GaussianBasisFamily: k must be >= 1");
  return uniform(k, 1.0 / (static_cast<double>(k) * k));
}

GaussianBasisFamily GaussianBasisFamily::uniform(int k, double h) {
  GaussianBasisFamily family;
  family.k = k;
  family.h = h;
  if (k == 1)
    family.centers = Eigen::VectorXd::Constant(1, 0.5);
  else
    family.centers = Eigen::VectorXd::LinSpaced(k, 0.0, 1.0);
  family.validate();
  return family;
}

void GaussianBasisFamily::validate() const {
  if (k < 1) throw ValidationError("GaussianBasisFamily: k must be >= 1");
  if (centers.size() != k)
    throw ValidationError("GaussianBasisFamily: centers size != k");
  if (!(h > 0.0) || !std::isfinite(h))
    throw ValidationError("GaussianBasisFamily: bandwidth h must be positive");
  const double overhang = 2.0 * std::sqrt(h);
  for (int i = 0; i < k; ++i) {
    if (!std::isfinite(centers[i]))
      throw ValidationError("GaussianBasisFamily: non-finite center");
    if (centers[i] < -overhang || centers[i] > 1.0 + overhang)
      throw ValidationError("GaussianBasisFamily: center outside [0,1] overhang band");
    if (i > 0 && centers[i] < centers[i - 1])
      throw ValidationError("GaussianBasisFamily: centers must be sorted ascending");
  }
}

Eigen::VectorXd eval_gaussian_basis(const GaussianBasisFamily& family, double z) {
  family.validate();
  if (!std::isfinite(z))
    throw ValidationError("eval_gaussian_basis: non-finite phase");
  Eigen::VectorXd b(family.k);
  for (int j = 0; j < family.k; ++j) b[j] = gaussian_rbf(z, family.centers[j], family.h);
  const double sum = b.sum();
  if (!(sum > 0.0))
    throw ValidationError("eval_gaussian_basis: degenerate family, all activations underflow to 0");
  return b / sum;
}

Eigen::VectorXd eval_cubic_rbf(const CubicRBFFamily& family, double x) {
  if (family.centers.size() == 0)
    throw ValidationError("eval_cubic_rbf: empty family");
  if (!std::isfinite(x)) throw ValidationError("eval_cubic_rbf: non-finite x");
  Eigen::VectorXd b(family.centers.size());
  for (Eigen::Index j = 0; j < family.centers.size(); ++j) {
    const double d = std::abs(x - family.centers[j]);
    b[j] = d * d * d;
  }
  return b;
}

Eigen::MatrixXd build_basis_matrix(const GaussianBasisFamily& family,
                                   const std::vector<double>& times,
                                   double total_duration) {
  if (times.empty()) throw ValidationError("build_basis_matrix: empty time vector");
  Eigen::MatrixXd Phi(static_cast<Eigen::Index>(times.size()), family.k);
  double prev = times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < prev - 1e-12)
      throw ValidationError("build_basis_matrix: times must be sorted ascending");
    prev = times[i];
    Phi.row(static_cast<Eigen::Index>(i)) =
        eval_gaussian_basis(family, phase(times[i], total_duration)).transpose();
  }
  return Phi;
}

}  // namespace ipromp
