#include "e2nn/distributions.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

void check_dof(double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidDof, "degrees of freedom must be > 0");
}

}  // namespace

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double t_pdf(double z, double nu) {
  check_dof(nu);
  // lgamma keeps this stable for very large nu, where the gamma ratio overflows.
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(z * z / nu));
}

double t_cdf(double z, double nu) {
  check_dof(nu);
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), z);
}

double t_quantile(double p, double nu) {
  check_dof(nu);
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile p must lie in (0,1)");
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

}  // namespace e2nn
