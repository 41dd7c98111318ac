#include "e2nn/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "e2nn/design.hpp"
#include "e2nn/error.hpp"

namespace e2nn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix correlation(const Matrix& x, const Vector& theta) {
  const Eigen::Index n = x.rows();
  Matrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double s = (theta.array() * (x.row(i) - x.row(k)).transpose().array().square()).sum();
      r(i, k) = r(k, i) = std::exp(-s);
    }
  }
  return r;
}

struct Factorization {
  Eigen::LLT<Matrix> llt;
  double nugget = 0.0;
};

std::optional<Factorization> factorize(const Matrix& corr, const GprSettings& settings) {
  const Eigen::Index n = corr.rows();
  for (double nugget = settings.nugget_start; nugget <= settings.nugget_max * (1.0 + 1e-9);
       nugget *= 10.0) {
    Factorization f;
    f.llt.compute(corr + nugget * Matrix::Identity(n, n));
    if (f.llt.info() == Eigen::Success) {
      f.nugget = nugget;
      return f;
    }
  }
  return std::nullopt;
}

struct Estimates {
  double mu = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = kNegInf;
  Vector weights;
};

Estimates estimate(const Factorization& f, const Vector& y) {
  const Eigen::Index n = y.size();
  const Vector ones = Vector::Ones(n);
  const Vector r_inv_one = f.llt.solve(ones);
  const Vector r_inv_y = f.llt.solve(y);
  Estimates e;
  e.mu = ones.dot(r_inv_y) / ones.dot(r_inv_one);
  const Vector resid = y - e.mu * ones;
  e.weights = f.llt.solve(resid);
  e.sigma2 = std::max(resid.dot(e.weights) / static_cast<double>(n),
                      std::numeric_limits<double>::min());
  const Matrix& l = f.llt.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  e.log_likelihood = -0.5 * static_cast<double>(n) * std::log(e.sigma2) - 0.5 * logdet;
  return e;
}

double log_likelihood_at(const Matrix& x, const Vector& y, const Vector& theta,
                         const GprSettings& settings) {
  const auto f = factorize(correlation(x, theta), settings);
  if (!f) return kNegInf;
  return estimate(*f, y).log_likelihood;
}

// Bounded Nelder-Mead maximization; vertices are clamped to the box.
Vector nelder_mead_max(const std::function<double(const Vector&)>& objective, Vector start,
                       double lo, double hi, std::size_t max_evals) {
  const Eigen::Index d = start.size();
  auto clamp = [&](Vector v) { return Vector(v.cwiseMax(lo).cwiseMin(hi)); };
  std::vector<Vector> simplex{clamp(start)};
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector v = simplex.front();
    v(j) += (v(j) + 0.5 <= hi) ? 0.5 : -0.5;
    simplex.push_back(clamp(v));
  }
  std::vector<double> values;
  std::size_t evals = 0;
  auto eval = [&](const Vector& v) {
    ++evals;
    const double f = objective(v);
    return std::isnan(f) ? kNegInf : f;
  };
  for (const auto& v : simplex) values.push_back(eval(v));

  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (std::isfinite(values[best]) && std::abs(values[best] - values[worst]) < 1e-10 &&
        (simplex[best] - simplex[worst]).cwiseAbs().maxCoeff() < 1e-8) {
      break;
    }

    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(d);

    const Vector reflected = clamp(centroid + (centroid - simplex[worst]));
    const double f_r = eval(reflected);
    if (f_r > values[best]) {
      const Vector expanded = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_e = eval(expanded);
      if (f_e > f_r) {
        simplex[worst] = expanded;
        values[worst] = f_e;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_r;
      }
      continue;
    }
    if (f_r > values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_r;
      continue;
    }
    const Vector contracted = clamp(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_c = eval(contracted);
    if (f_c > values[worst]) {
      simplex[worst] = contracted;
      values[worst] = f_c;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = clamp(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::max_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

void check_training_data(const Matrix& x, const Vector& y) {
  if (x.rows() < 2) throw Error(ErrorCode::InsufficientData, "kriging needs at least two points");
  if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "kriging x/y size mismatch");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFinite, "kriging data not finite");
}

void check_settings(const GprSettings& s) {
  if (!(s.nugget_start > 0.0) || !(s.nugget_max >= s.nugget_start)) {
    throw Error(ErrorCode::InvalidArgument, "kriging nugget range must satisfy 0 < start <= max");
  }
  if (!(s.theta_lo > 0.0) || !(s.theta_hi > s.theta_lo)) {
    throw Error(ErrorCode::InvalidArgument, "kriging theta range must satisfy 0 < lo < hi");
  }
}

}  // namespace

double concentrated_log_likelihood(const Matrix& x, const Vector& y, const Vector& theta,
                                   double nugget) {
  GprSettings s;
  s.nugget_start = nugget;
  s.nugget_max = nugget;
  check_settings(s);
  return log_likelihood_at(x, y, theta, s);
}

GprModel gpr_condition(const Matrix& x, const Vector& y, const Vector& theta,
                       const GprSettings& settings) {
  check_training_data(x, y);
  check_settings(settings);
  if (theta.size() != x.cols() || (theta.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "theta must be positive with one entry per dimension");
  }
  const auto f = factorize(correlation(x, theta), settings);
  if (!f) {
    throw Error(ErrorCode::SingularCorrelation,
                "correlation matrix not positive definite at nugget " +
                    std::to_string(settings.nugget_max));
  }
  const Estimates e = estimate(*f, y);
  GprModel m;
  m.x_train = x;
  m.y_train = y;
  m.theta = theta;
  m.sigma2 = e.sigma2;
  m.mu_hat = e.mu;
  m.nugget = f->nugget;
  m.log_likelihood = e.log_likelihood;
  m.cholesky_factor = f->llt.matrixL();
  m.weights = e.weights;
  return m;
}

std::vector<Vector> gpr_multistart_points(std::size_t dim, const GprSettings& settings) {
  const double lo = std::log10(settings.theta_lo);
  const double hi = std::log10(settings.theta_hi);
  std::vector<Vector> starts;
  for (const Point& z : lhs_design(std::max<std::size_t>(settings.multistarts, 1), dim, settings.seed)) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      v(static_cast<Eigen::Index>(j)) = lo + 0.5 * (z[j] + 1.0) * (hi - lo);
    }
    starts.push_back(v);
  }
  return starts;
}

GprModel gpr_fit(const Matrix& x, const Vector& y, const GprSettings& settings) {
  check_training_data(x, y);
  check_settings(settings);
  const double lo = std::log10(settings.theta_lo);
  const double hi = std::log10(settings.theta_hi);
  const auto dim = static_cast<std::size_t>(x.cols());

  // Constant responses carry no information about theta.
  if ((y.array() == y(0)).all()) {
    return gpr_condition(x, y, Vector::Ones(x.cols()), settings);
  }

  auto objective = [&](const Vector& log_theta) {
    const Vector theta = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
    return log_likelihood_at(x, y, theta, settings);
  };

  Vector best_log;
  double best_value = kNegInf;
  for (const Vector& start : gpr_multistart_points(dim, settings)) {
    const Vector candidate = nelder_mead_max(objective, start, lo, hi, settings.max_evals_per_start);
    const double value = objective(candidate);
    if (best_log.size() == 0 || value > best_value) {
      best_value = value;
      best_log = candidate;
    }
  }
  if (!std::isfinite(best_value)) {
    throw Error(ErrorCode::SingularCorrelation, "no theta gave a factorizable correlation matrix");
  }
  const Vector theta = best_log.unaryExpr([](double v) { return std::pow(10.0, v); });
  return gpr_condition(x, y, theta, settings);
}

std::pair<double, double> gpr_predict(const GprModel& model, std::span<const double> x_scaled) {
  const Eigen::Index n = model.x_train.rows();
  if (static_cast<Eigen::Index>(x_scaled.size()) != model.x_train.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "kriging predict: dimension mismatch");
  }
  // The nugget is treated as part of the kernel's diagonal, so an exact
  // training input reproduces its response with zero variance.
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    bool same = true;
    for (Eigen::Index j = 0; j < model.x_train.cols(); ++j) {
      const double diff = x_scaled[static_cast<std::size_t>(j)] - model.x_train(i, j);
      same = same && diff == 0.0;
      s += model.theta(j) * diff * diff;
    }
    if (same) return {model.y_train(i), 0.0};
    r(i) = std::exp(-s);
  }
  const double mean = model.mu_hat + r.dot(model.weights);
  const Vector v = model.cholesky_factor.triangularView<Eigen::Lower>().solve(r);
  const double var = model.sigma2 * std::max(1.0 + model.nugget - v.squaredNorm(), 0.0);
  return {mean, std::sqrt(var)};
}

RunState run_ego(const EgoProblem& problem, const EgoSettings& settings,
                 const IterationObserver& observer) {
  auto factory = [&](const Dataset& data, const Incumbent& incumbent, std::size_t iteration) {
    GprSettings gs = settings.gpr;
    gs.seed = mix_seed(settings.gpr.seed ^ settings.seed, iteration);
    const Matrix x = data.scaled_matrix();
    const Vector y = Eigen::Map<const Vector>(data.ys().data(), static_cast<Eigen::Index>(data.size()));
    auto model = std::make_shared<const GprModel>(gpr_fit(x, y, gs));

    SurrogateStep step;
    step.diagnostics.theta.assign(model->theta.data(), model->theta.data() + model->theta.size());
    step.diagnostics.nugget = model->nugget;
    const double f_min = incumbent.f_min;
    step.acquisition = [model, f_min](const Matrix& pts) {
      Vector out(pts.rows());
      std::vector<double> row(static_cast<std::size_t>(pts.cols()));
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) row[static_cast<std::size_t>(j)] = pts(i, j);
        const auto [mean, sd] = gpr_predict(*model, row);
        out(i) = ei_gaussian(mean, sd, f_min);
      }
      return out;
    };
    return step;
  };
  return run_surrogate_loop(problem.hf, problem.bounds, settings, factory, observer);
}

Emulator gpr_emulator(std::string name, const ScalarFunction& lf_original, const Bounds& bounds,
                      std::size_t n_samples, std::uint64_t seed, const GprSettings& settings) {
  const std::vector<Point> design = lhs_design(n_samples, bounds.size(), seed);
  Matrix x(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(bounds.size()));
  Vector y(static_cast<Eigen::Index>(n_samples));
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = design[i][j];
    }
    y(static_cast<Eigen::Index>(i)) = lf_original(to_original(design[i], bounds));
  }
  auto model = std::make_shared<const GprModel>(gpr_fit(x, y, settings));
  return Emulator{std::move(name),
                  [model](std::span<const double> z) { return gpr_predict(*model, z).first; }};
}

}  // namespace e2nn
