#include "e2nn/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "e2nn/distributions.hpp"
#include "e2nn/error.hpp"

namespace e2nn {

double ei_gaussian(double mu, double sigma, double f_min) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  const double gain = f_min - mu;
  if (sigma == 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return std::max(gain * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

double ei_student_t(const TPrediction& pred, double f_min) {
  const double nu = pred.dof;
  if (!(nu > 1.0)) throw Error(ErrorCode::InvalidDof, "Student-t EI needs dof > 1");
  if (!(pred.scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be >= 0");
  const double gain = f_min - pred.mean;
  if (pred.scale == 0.0) return std::max(gain, 0.0);
  const double z = gain / pred.scale;
  const double tail = nu / (nu - 1.0) * (1.0 + z * z / nu) * pred.scale * t_pdf(z, nu);
  return std::max(gain * t_cdf(z, nu) + tail, 0.0);
}

double ei_numeric_oracle(const std::function<double(double)>& pdf, double f_min,
                         std::span<const double> breakpoints, double tolerance) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  std::vector<double> cuts;
  for (double b : breakpoints) {
    if (b < f_min && std::isfinite(b)) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double y) { return pdf(y) * (f_min - y); };
  // Lower tail (-inf, b] with y = b - e^u. Algebraic tails like Student-t
  // become exponential in u, so a finite u range extended until the
  // integrand is negligible covers them.
  const double b = cuts.empty() ? f_min : cuts.front();
  auto tail = [&](double u) {
    const double s = std::exp(u);
    return integrand(b - s) * s;
  };

  // Global adaptive GK61: keep bisecting the piece with the largest error
  // estimate until the summed estimate meets the tolerance.
  struct Piece {
    double a, b, value, error, l1;
    bool in_tail;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto rule = [&](double a, double b, bool in_tail) {
    Piece p{a, b, 0.0, 0.0, 0.0, in_tail};
    p.value = in_tail ? Quad::integrate(tail, a, b, 0, 0.0, &p.error, &p.l1)
                      : Quad::integrate(integrand, a, b, 0, 0.0, &p.error, &p.l1);
    return p;
  };
  std::priority_queue<Piece> pieces;
  double total = 0.0;
  double total_error = 0.0;
  double total_l1 = 0.0;
  auto push = [&](const Piece& p) {
    total += p.value;
    total_error += p.error;
    total_l1 += p.l1;
    pieces.push(p);
  };

  std::vector<double> edges(cuts.begin(), cuts.end());
  edges.push_back(f_min);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push(rule(edges[i], edges[i + 1], false));
  constexpr double kStep = 5.0;
  double u = -60.0;
  for (; u < 60.0; u += kStep) push(rule(u, u + kStep, true));
  for (; std::abs(tail(u)) > 1e-3 * tolerance * std::max(1.0, std::abs(total)); u += kStep) {
    if (u > 700.0) {
      throw Error(ErrorCode::QuadratureFailure, "EI quadrature: density tail decays too slowly");
    }
    push(rule(u, u + kStep, true));
  }

  constexpr std::size_t kMaxPieces = 20000;
  while (std::isfinite(total_error) && total_error > tolerance * std::max(1.0, total_l1) &&
         pieces.size() < kMaxPieces) {
    const Piece worst = pieces.top();
    pieces.pop();
    total -= worst.value;
    total_error -= worst.error;
    total_l1 -= worst.l1;
    const double mid = 0.5 * (worst.a + worst.b);
    push(rule(worst.a, mid, worst.in_tail));
    push(rule(mid, worst.b, worst.in_tail));
  }
  // Recompute the sums to shed drift from the running updates.
  total = total_error = total_l1 = 0.0;
  for (; !pieces.empty(); pieces.pop()) {
    total += pieces.top().value;
    total_error += pieces.top().error;
    total_l1 += pieces.top().l1;
  }
  if (!std::isfinite(total) || total_error > tolerance * std::max(1.0, total_l1)) {
    throw Error(ErrorCode::QuadratureFailure,
                "EI quadrature error estimate " + std::to_string(total_error));
  }
  return total;
}

}  // namespace e2nn
