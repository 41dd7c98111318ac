#pragma once

#include <functional>
#include <limits>
#include <span>

#include "e2nn/emulator.hpp"
#include "e2nn/posterior.hpp"

namespace e2nn {

/// Best high-fidelity observation so far.
struct Incumbent {
  double f_min = std::numeric_limits<double>::infinity();
  Point x_min;
};

/// Expected improvement below f_min of N(mu, sigma^2).
double ei_gaussian(double mu, double sigma, double f_min);

/// Expected improvement of a location-scale Student-t prediction. Throws
/// InvalidDof when dof <= 1, where the expectation does not exist.
double ei_student_t(const TPrediction& pred, double f_min);

/// Slow reference: integral of pdf(y) * max(f_min - y, 0) over (-inf, f_min]
/// by adaptive Gauss-Kronrod quadrature. `breakpoints` split the range where
/// the integrand is narrow or kinked. Throws QuadratureFailure when the error
/// estimate exceeds `tolerance`.
double ei_numeric_oracle(const std::function<double(double)>& pdf, double f_min,
                         std::span<const double> breakpoints = {}, double tolerance = 1e-10);

}  // namespace e2nn
