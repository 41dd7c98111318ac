#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "e2nn/adaptive.hpp"
#include "e2nn/emulator.hpp"
#include "e2nn/linalg.hpp"

namespace e2nn {

struct GprSettings {
  double theta_lo = 1e-3;
  double theta_hi = 1e3;
  std::size_t multistarts = 10;
  std::size_t max_evals_per_start = 200;
  double nugget_start = 1e-10;
  double nugget_max = 1e-4;
  std::uint64_t seed = 0;
};

/// Ordinary kriging with a squared-exponential correlation
/// exp(-sum_j theta_j (x_j - x'_j)^2) and a constant mean. Inputs are in the
/// scaled [-1, 1]^d domain.
struct GprModel {
  Matrix x_train;  // n x d
  Vector y_train;
  Vector theta;
  double sigma2 = 0.0;
  double mu_hat = 0.0;
  double nugget = 0.0;
  double log_likelihood = 0.0;
  Matrix cholesky_factor;  // lower factor of R + nugget * I
  Vector weights;          // (R + nugget I)^-1 (y - mu_hat)
};

/// Concentrated log-likelihood -n/2 ln sigma2 - 1/2 ln|R| at fixed theta and
/// nugget. Returns -inf if the correlation matrix is not positive definite.
double concentrated_log_likelihood(const Matrix& x, const Vector& y, const Vector& theta,
                                   double nugget);

/// Condition the model on data at fixed theta, escalating the nugget x10 from
/// settings.nugget_start until the Cholesky factorization succeeds. Throws
/// SingularCorrelation past settings.nugget_max.
GprModel gpr_condition(const Matrix& x, const Vector& y, const Vector& theta,
                       const GprSettings& settings = {});

/// Fit theta by multistart bounded Nelder-Mead on log10(theta), then
/// condition. Needs n >= 2 distinct points.
GprModel gpr_fit(const Matrix& x, const Vector& y, const GprSettings& settings = {});

/// The log10(theta) starting points gpr_fit uses.
std::vector<Vector> gpr_multistart_points(std::size_t dim, const GprSettings& settings);

/// Kriging mean and standard deviation at a scaled point.
std::pair<double, double> gpr_predict(const GprModel& model, std::span<const double> x_scaled);

struct EgoProblem {
  ScalarFunction hf;  // original units
  Bounds bounds;
};

struct EgoSettings : LoopSettings {
  GprSettings gpr;
};

/// Efficient global optimization: kriging plus Gaussian EI in the same loop
/// (and trace format) as run_adaptive.
RunState run_ego(const EgoProblem& problem, const EgoSettings& settings,
                 const IterationObserver& observer = {});

/// Sample an expensive low-fidelity function on an LHS of n_samples points
/// and wrap the fitted kriging mean as an Emulator.
Emulator gpr_emulator(std::string name, const ScalarFunction& lf_original, const Bounds& bounds,
                      std::size_t n_samples, std::uint64_t seed, const GprSettings& settings = {});

}  // namespace e2nn
