#include "e2nn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

void check_inputs(const Matrix& design, const Vector& targets) {
  if (design.rows() == 0 || design.cols() == 0) {
    throw Error(ErrorCode::EmptyInput, "design matrix has no rows or columns");
  }
  if (design.rows() != targets.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "design has " + std::to_string(design.rows()) + " rows but " +
                    std::to_string(targets.size()) + " targets");
  }
  if (!design.allFinite() || !targets.allFinite()) {
    throw Error(ErrorCode::NonFinite, "regression inputs contain non-finite values");
  }
}

// Shared by pinv_solve and ridge_solve: apply a spectral filter to U^T y.
template <typename Filter>
RegressionSolution solve_spectral(const Matrix& design, const Vector& targets, double rcond,
                                  Filter filter) {
  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rcond * sigma(0) : 0.0;

  Vector coeffs = svd.matrixU().transpose() * targets;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    coeffs(i) = (sigma(i) > cutoff && sigma(i) > 0.0) ? coeffs(i) * filter(sigma(i)) : 0.0;
  }

  RegressionSolution out;
  out.weights = svd.matrixV() * coeffs;
  out.max_abs_weight = out.weights.size() ? out.weights.cwiseAbs().maxCoeff() : 0.0;
  const Vector fitted = design * out.weights;
  out.residual_nrmse = fit_error(std::span<const double>(fitted.data(), fitted.size()),
                                 std::span<const double>(targets.data(), targets.size()));
  return out;
}

}  // namespace

RegressionSolution pinv_solve(const Matrix& design, const Vector& targets, double rcond) {
  if (!(rcond > 0.0 && rcond < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rcond must lie in (0, 1)");
  }
  check_inputs(design, targets);
  return solve_spectral(design, targets, rcond, [](double s) { return 1.0 / s; });
}

RegressionSolution ridge_solve(const Matrix& design, const Vector& targets, double lambda,
                               double rcond) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "ridge lambda must be finite and >= 0");
  }
  check_inputs(design, targets);
  return solve_spectral(design, targets, rcond,
                        [lambda](double s) { return s / (s * s + lambda); });
}

double nrmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::DimensionMismatch, "nrmse: length mismatch");
  }
  if (truths.size() < 2) {
    throw Error(ErrorCode::EmptyInput, "nrmse needs at least two points");
  }
  double mean = 0.0;
  for (double t : truths) mean += t;
  mean /= static_cast<double>(truths.size());

  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = predictions[i] - truths[i];
    const double d = mean - truths[i];
    num += e * e;
    den += d * d;
  }
  if (den == 0.0) {
    throw Error(ErrorCode::DegenerateTruths, "nrmse: all truths are identical");
  }
  return std::sqrt(num / den);
}

double fit_error(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || truths.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "fit_error: length mismatch or empty input");
  }
  const bool degenerate =
      std::all_of(truths.begin(), truths.end(), [&](double t) { return t == truths[0]; });
  if (!degenerate) return nrmse(predictions, truths);

  double sq = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = predictions[i] - truths[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(truths.size()));
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace e2nn
