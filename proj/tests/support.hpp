#pragma once

// Independent oracles shared by the unit tests. Nothing here calls into the
// library under test.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace e2nn::testing {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

inline double oracle_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double oracle_t_pdf(double z, double nu) {
  const double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
                   std::sqrt(nu * std::numbers::pi);
  return c * std::pow(1.0 + z * z / nu, -0.5 * (nu + 1.0));
}

inline double forrester_hf(double x) {
  return (6.0 * x - 2.0) * (6.0 * x - 2.0) * std::sin(12.0 * x - 4.0);
}

}  // namespace e2nn::testing
