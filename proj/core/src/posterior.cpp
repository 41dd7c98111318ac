#include "e2nn/posterior.hpp"

#include <cmath>
#include <string>

#include "e2nn/distributions.hpp"
#include "e2nn/error.hpp"

namespace e2nn {

std::pair<double, double> TPrediction::central_interval(double mass) const {
  if (!(mass > 0.0 && mass < 1.0)) throw Error(ErrorCode::InvalidArgument, "mass must be in (0,1)");
  const double q = t_quantile(0.5 + 0.5 * mass, dof);
  return {mean - q * scale, mean + q * scale};
}

TPrediction fuse_predictions(std::span<const double> member_predictions) {
  const std::size_t n = member_predictions.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "fusing needs at least two members");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double y : member_predictions) mean += y;
  mean /= nd;
  double ss = 0.0;
  for (double y : member_predictions) ss += (y - mean) * (y - mean);
  const double s_sq = ss / (nd - 1.0);
  return TPrediction{mean, std::sqrt((1.0 + nd) / nd * s_sq), nd - 1.0, n};
}

NixParams conjugate_posterior(const NixParams& prior, std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 1) throw Error(ErrorCode::InsufficientData, "conjugate update needs data");
  const double nd = static_cast<double>(n);
  const double kappa_n = prior.kappa + nd;
  const double nu_n = prior.nu + nd;
  if (!(kappa_n > 0.0) || !(nu_n > 0.0)) {
    throw Error(ErrorCode::InsufficientData,
                "prior strengths leave no information after " + std::to_string(n) + " points");
  }
  double ybar = 0.0;
  for (double y : data) ybar += y;
  ybar /= nd;
  double ss = 0.0;
  for (double y : data) ss += (y - ybar) * (y - ybar);

  NixParams post;
  post.kappa = kappa_n;
  post.nu = nu_n;
  post.mu = (prior.kappa * prior.mu + nd * ybar) / kappa_n;
  const double shrink = nd * prior.kappa / (prior.kappa + nd);
  post.sigma_sq =
      (prior.nu * prior.sigma_sq + ss + shrink * (prior.mu - ybar) * (prior.mu - ybar)) / nu_n;
  return post;
}

TPrediction predictive_from_posterior(const NixParams& posterior, std::size_t n_data) {
  if (!(posterior.kappa > 0.0) || !(posterior.nu > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "posterior strengths must be positive");
  }
  const double scale_sq = (1.0 + posterior.kappa) / posterior.kappa * posterior.sigma_sq;
  return TPrediction{posterior.mu, std::sqrt(scale_sq), posterior.nu, n_data};
}

}  // namespace e2nn
