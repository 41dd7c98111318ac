#pragma once

#include <span>

#include <Eigen/Dense>

namespace e2nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRcond = 1e-10;

struct RegressionSolution {
  Vector weights;
  double max_abs_weight = 0.0;
  /// NRMSE of design * weights against the targets. When the targets are all
  /// identical the ratio is undefined and the RMS residual is reported instead.
  double residual_nrmse = 0.0;
};

/// Minimum-norm least squares through a truncated SVD. Singular values below
/// rcond * sigma_max are dropped from the pseudoinverse.
RegressionSolution pinv_solve(const Matrix& design, const Vector& targets,
                              double rcond = kDefaultRcond);

/// argmin |design * w - targets|^2 + lambda |w|^2, solved on the SVD so that
/// lambda = 0 reduces to pinv_solve.
RegressionSolution ridge_solve(const Matrix& design, const Vector& targets, double lambda,
                               double rcond = kDefaultRcond);

/// sqrt( sum (pred - truth)^2 / sum (mean(truth) - truth)^2 )
double nrmse(std::span<const double> predictions, std::span<const double> truths);

/// nrmse() when the truths vary, otherwise the RMS error. Used by the
/// training filters, which must also handle one-point and constant data.
double fit_error(std::span<const double> predictions, std::span<const double> truths);

bool all_finite(const Matrix& m);

}  // namespace e2nn
