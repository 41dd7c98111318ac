#pragma once

namespace e2nn {

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// Standard Student-t density and distribution function with `nu` degrees of
/// freedom. Throw InvalidDof when nu <= 0.
double t_pdf(double z, double nu);
double t_cdf(double z, double nu);

/// Inverse of t_cdf; p in (0, 1).
double t_quantile(double p, double nu);

}  // namespace e2nn
