#include "e2nn/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include "e2nn/design.hpp"
#include "e2nn/error.hpp"

namespace e2nn {

namespace {

constexpr std::uint64_t kDesignSalt = 0xD0E;
constexpr std::uint64_t kSearchSalt = 0x5EA;
constexpr std::uint64_t kEnsembleSalt = 0xE25;

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

bool is_duplicate(std::span<const double> x, std::span<const Point> existing, double guard) {
  return std::any_of(existing.begin(), existing.end(),
                     [&](const Point& p) { return inf_distance(x, p) < guard; });
}

Matrix to_matrix(std::span<const Point> pts, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pts[i][j];
    }
  }
  return m;
}

// Coordinate search from `start`, refusing moves onto existing samples.
std::pair<Point, double> polish(const BatchAcquisition& acquisition, Point start, double start_value,
                                std::span<const Point> existing, const AcquisitionSearch& search,
                                std::size_t& evaluations) {
  const std::size_t dim = start.size();
  Point best = std::move(start);
  double best_value = start_value;
  double step = search.polish_initial_step;
  std::size_t used = 0;
  while (used + 2 * dim <= search.polish_evals && step > 1e-9) {
    std::vector<Point> trial;
    trial.reserve(2 * dim);
    for (std::size_t j = 0; j < dim; ++j) {
      for (double sign : {-1.0, 1.0}) {
        Point p = best;
        p[j] = std::clamp(p[j] + sign * step, -1.0, 1.0);
        trial.push_back(std::move(p));
      }
    }
    const Vector values = acquisition(to_matrix(trial, dim));
    used += trial.size();
    evaluations += trial.size();
    std::size_t arg = trial.size();
    double top = best_value;
    for (std::size_t k = 0; k < trial.size(); ++k) {
      const double v = values(static_cast<Eigen::Index>(k));
      if (v > top && !is_duplicate(trial[k], existing, search.duplicate_guard)) {
        top = v;
        arg = k;
      }
    }
    if (arg < trial.size()) {
      best = trial[arg];
      best_value = top;
    } else {
      step *= 0.5;
    }
  }
  return {std::move(best), best_value};
}

}  // namespace

std::size_t default_n_init(std::size_t d) noexcept {
  return d == 1 ? 3 : std::max<std::size_t>(8, 2 * d + 2);
}

std::size_t default_max_iterations(std::size_t d) noexcept { return 50 * d; }

AcquisitionResult maximize_acquisition(const BatchAcquisition& acquisition,
                                       std::span<const Point> existing_scaled, std::size_t dim,
                                       std::uint64_t seed, const AcquisitionSearch& search) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "acquisition dimension must be >= 1");
  std::vector<Point> candidates = halton_points(search.candidates_per_dim * dim, dim, seed);

  // Perturbed midpoints between pairs of existing samples.
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::size_t added = 0;
  for (std::size_t i = 0; i < existing_scaled.size() && added < search.max_midpoints; ++i) {
    for (std::size_t k = i + 1; k < existing_scaled.size() && added < search.max_midpoints; ++k) {
      const double spread = 0.05 * inf_distance(existing_scaled[i], existing_scaled[k]);
      Point mid(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        mid[j] = std::clamp(0.5 * (existing_scaled[i][j] + existing_scaled[k][j]) + spread * jitter(rng),
                            -1.0, 1.0);
      }
      candidates.push_back(std::move(mid));
      ++added;
    }
  }

  std::vector<Point> kept;
  kept.reserve(candidates.size());
  for (auto& c : candidates) {
    if (!is_duplicate(c, existing_scaled, search.duplicate_guard)) kept.push_back(std::move(c));
  }
  if (kept.empty()) throw Error(ErrorCode::InvalidArgument, "no admissible acquisition candidates");

  const Vector values = acquisition(to_matrix(kept, dim));
  AcquisitionResult result;
  result.evaluations = kept.size();

  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t starts = std::min(search.polish_starts, kept.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = values(static_cast<Eigen::Index>(a));
                      const double vb = values(static_cast<Eigen::Index>(b));
                      return va > vb || (va == vb && a < b);
                    });

  result.x_scaled = kept[order[0]];
  result.ei = values(static_cast<Eigen::Index>(order[0]));
  for (std::size_t s = 0; s < starts; ++s) {
    const std::size_t idx = order[s];
    auto [x, v] = polish(acquisition, kept[idx], values(static_cast<Eigen::Index>(idx)),
                         existing_scaled, search, result.evaluations);
    if (v > result.ei) {
      result.ei = v;
      result.x_scaled = std::move(x);
    }
  }
  return result;
}

AcquisitionResult maximize_acquisition(const Ensemble& ensemble, const Incumbent& incumbent,
                                       const Dataset& data, std::uint64_t seed,
                                       const AcquisitionSearch& search) {
  std::vector<Point> existing;
  existing.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) existing.push_back(data.x_scaled(i));
  const double f_min = incumbent.f_min;
  BatchAcquisition ei = [&ensemble, f_min](const Matrix& x) {
    const auto preds = ensemble.posterior_predictive(x);
    Vector out(static_cast<Eigen::Index>(preds.size()));
    for (std::size_t i = 0; i < preds.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = ei_student_t(preds[i], f_min);
    }
    return out;
  };
  return maximize_acquisition(ei, existing, data.dim(), seed, search);
}

std::vector<Point> initial_design(const Bounds& bounds, const LoopSettings& settings) {
  if (!settings.initial_design.empty()) return settings.initial_design;
  const std::size_t d = bounds.size();
  const std::size_t n = settings.n_init.value_or(default_n_init(d));
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n_init must be >= 2");
  std::vector<Point> pts;
  for (const Point& z : lhs_design(n, d, mix_seed(settings.seed, kDesignSalt))) {
    pts.push_back(to_original(z, bounds));
  }
  return pts;
}

RunState run_surrogate_loop(const ScalarFunction& hf, const Bounds& bounds,
                            const LoopSettings& settings, const SurrogateFactory& factory,
                            const IterationObserver& observer) {
  RunState state(bounds);
  state.ei_tolerance = settings.ei_tolerance;
  state.max_iterations = settings.max_iterations.value_or(default_max_iterations(bounds.size()));
  if (std::isnan(settings.ei_tolerance) || settings.ei_tolerance < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "ei_tolerance must be >= 0");
  }

  const std::vector<Point> design = initial_design(bounds, settings);
  if (design.size() < 2) throw Error(ErrorCode::InvalidArgument, "initial design needs >= 2 points");
  for (const Point& x : design) state.dataset.add(x, hf(x));
  state.n_initial = state.dataset.size();

  auto refresh_incumbent = [&state] {
    const std::size_t best = state.dataset.argmin();
    state.incumbent = Incumbent{state.dataset.y(best), state.dataset.x(best)};
  };
  refresh_incumbent();

  std::vector<Point> existing;
  for (std::size_t i = 0; i < state.dataset.size(); ++i) existing.push_back(state.dataset.x_scaled(i));

  for (;;) {
    const std::size_t it = state.iteration;
    SurrogateStep step = factory(state.dataset, state.incumbent, it);
    const AcquisitionResult best =
        maximize_acquisition(step.acquisition, existing, bounds.size(),
                             mix_seed(settings.seed, kSearchSalt + it), settings.search);

    IterationRecord rec;
    rec.iteration = it;
    rec.n_samples = state.dataset.size();
    rec.x_star = to_original(best.x_scaled, bounds);
    rec.ei_star = best.ei;
    rec.diagnostics = std::move(step.diagnostics);
    ++state.iteration;

    const double threshold = settings.ei_tolerance * std::max(1.0, std::abs(state.incumbent.f_min));
    if (best.ei < threshold) {
      state.converged = true;
    } else if (state.adaptive_samples() >= state.max_iterations) {
      state.budget_exhausted = true;
    } else {
      const double y = hf(rec.x_star);
      state.dataset.add(rec.x_star, y);
      existing.push_back(state.dataset.x_scaled(state.dataset.size() - 1));
      rec.x_added = rec.x_star;
      rec.hf_value = y;
      refresh_incumbent();
    }
    rec.f_min_after = state.incumbent.f_min;
    state.history.push_back(rec);
    if (observer) observer(state, state.history.back());
    if (state.converged || state.budget_exhausted) break;
  }
  return state;
}

SurrogateDiagnostics diagnose(const Ensemble& ensemble) {
  SurrogateDiagnostics d;
  d.members_total = ensemble.records().size();
  d.members_retained = ensemble.members().size();
  d.dropped_weight = ensemble.dropped_count(DropReason::WeightMagnitude);
  d.dropped_nrmse = ensemble.dropped_count(DropReason::TrainingNrmse);
  d.dropped_nonfinite = ensemble.dropped_count(DropReason::NonFinite);
  d.small_fourier_scale = ensemble.small_fourier_scale();
  d.large_fourier_scale = ensemble.large_fourier_scale();
  d.small_escalations = ensemble.small_escalations();
  d.large_escalations = ensemble.large_escalations();
  double max_nrmse = 0.0;
  double max_weight = 0.0;
  for (const auto& m : ensemble.members()) {
    max_nrmse = std::max(max_nrmse, m.stats().training_nrmse);
    max_weight = std::max(max_weight, m.stats().max_abs_weight);
  }
  d.retained_max_nrmse = max_nrmse;
  d.retained_max_weight = max_weight;
  return d;
}

RunState run_adaptive(const AdaptiveProblem& problem, const AdaptiveSettings& settings,
                      const IterationObserver& observer,
                      const std::function<void(const Ensemble&)>& on_ensemble) {
  settings.ensemble.validate();
  EnsembleConfig config = settings.ensemble;
  auto factory = [&](const Dataset& data, const Incumbent& incumbent, std::size_t iteration) {
    EnsembleConfig cfg = config;
    cfg.base_seed = settings.ensemble.base_seed + mix_seed(settings.seed, kEnsembleSalt + iteration);
    auto ensemble = std::make_shared<const Ensemble>(Ensemble::build(data, problem.emulators, cfg));
    config.small_fourier_scale = ensemble->small_fourier_scale();
    config.large_fourier_scale = ensemble->large_fourier_scale();
    if (on_ensemble) on_ensemble(*ensemble);

    SurrogateStep step;
    step.diagnostics = diagnose(*ensemble);
    const double f_min = incumbent.f_min;
    step.acquisition = [ensemble, f_min](const Matrix& x) {
      const auto preds = ensemble->posterior_predictive(x);
      Vector out(static_cast<Eigen::Index>(preds.size()));
      for (std::size_t i = 0; i < preds.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = ei_student_t(preds[i], f_min);
      }
      return out;
    };
    return step;
  };
  return run_surrogate_loop(problem.hf, problem.bounds, settings, factory, observer);
}

}  // namespace e2nn
