#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ipromp/errors.hpp"

namespace ipromp {

using Vec3 = Eigen::Vector3d;

/// Phase variable: maps time t in [0, total_duration] to z in [0, 1].
double phase(double t, double total_duration);

/// Unnormalized Gaussian radial basis exp(-(z - c)^2 / (2 h)).
double gaussian_rbf(double z, double c, double h);

/// Family of k Gaussian bases sharing one bandwidth over the phase interval.
struct GaussianBasisFamily {
  int k = 0;
  Eigen::VectorXd centers;  // ascending; inside [0,1] up to a 2*sqrt(h) overhang
  double h = 0.0;

  static GaussianBasisFamily uniform(int k);  // evenly spaced centers, h = 1/k^2
  static GaussianBasisFamily uniform(int k, double h);
  void validate() const;
};

/// Normalized activations at phase z; entries sum to 1.
Eigen::VectorXd eval_gaussian_basis(const GaussianBasisFamily& family, double z);

/// Cubic radial basis phi(x) = |x - c|^3, used by the demonstration synthesizer.
struct CubicRBFFamily {
  Eigen::VectorXd centers;
};

Eigen::VectorXd eval_cubic_rbf(const CubicRBFFamily& family, double x);

/// n x k matrix of normalized activations, one row per time stamp.
Eigen::MatrixXd build_basis_matrix(const GaussianBasisFamily& family,
                                   const std::vector<double>& times,
                                   double total_duration);

}  // namespace ipromp
