#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace e2nn {

/// Location-scale Student-t predictive distribution at one point.
struct TPrediction {
  double mean = 0.0;
  double scale = 0.0;
  double dof = 0.0;
  std::size_t n_members = 0;

  /// Central interval holding `mass` of the probability, e.g. 0.95.
  std::pair<double, double> central_interval(double mass) const;
};

/// Fuse n member predictions into t_{n-1}(ybar, (1+n)/n * s^2), with s^2 the
/// unbiased sample variance. Requires n >= 2.
TPrediction fuse_predictions(std::span<const double> member_predictions);

/// Normal-inverse-chi-squared hyperparameters.
struct NixParams {
  double mu = 0.0;
  double kappa = 0.0;
  double nu = -1.0;
  double sigma_sq = 0.0;

  /// kappa0 = 0, nu0 = -1, sigma0^2 = 0.
  static NixParams uninformative() { return {0.0, 0.0, -1.0, 0.0}; }
};

/// Conjugate update of a normal model with unknown mean and variance.
NixParams conjugate_posterior(const NixParams& prior, std::span<const double> data);

/// Posterior predictive of a NIX posterior: t_{nu_n}(mu_n, (1+kappa_n)/kappa_n * sigma_n^2).
TPrediction predictive_from_posterior(const NixParams& posterior, std::size_t n_data);

}  // namespace e2nn
