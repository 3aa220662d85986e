#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace qocsim {

// Scalar model y = f(x; p) evaluated at one abscissa.
using ModelFn = std::function<double(double x, const Eigen::VectorXd& p)>;

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // from the final J^T W J
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Weighted Levenberg-Marquardt least squares with forward-difference
// Jacobian. `sigma` holds per-point standard deviations (empty = unit
// weights). Throws fit_error on degenerate input or non-convergence.
FitResult fit_curve(const ModelFn& f, const std::vector<double>& x,
                    const std::vector<double>& y,
                    const std::vector<double>& sigma,
                    const Eigen::VectorXd& p0, int max_iter = 200);

}  // namespace qocsim
