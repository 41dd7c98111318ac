#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "e2nn/acquisition.hpp"
#include "e2nn/dataset.hpp"
#include "e2nn/ensemble.hpp"

namespace e2nn {

/// Candidate sweep plus local polish used to maximize the acquisition.
struct AcquisitionSearch {
  std::size_t candidates_per_dim = 4096;
  std::size_t polish_starts = 8;
  std::size_t polish_evals = 50;
  double polish_initial_step = 0.05;
  std::size_t max_midpoints = 2048;
  /// Infinity-norm distance in scaled units below which a candidate counts
  /// as a duplicate of an existing sample.
  double duplicate_guard = 1e-6;
};

struct AcquisitionResult {
  Point x_scaled;
  double ei = 0.0;
  std::size_t evaluations = 0;
};

/// Acquisition values at each row of a scaled-input matrix.
using BatchAcquisition = std::function<Vector(const Matrix& x_scaled)>;

AcquisitionResult maximize_acquisition(const BatchAcquisition& acquisition,
                                       std::span<const Point> existing_scaled, std::size_t dim,
                                       std::uint64_t seed, const AcquisitionSearch& search = {});

/// Maximize Student-t EI of the ensemble against the incumbent, avoiding the
/// samples already in `data`.
AcquisitionResult maximize_acquisition(const Ensemble& ensemble, const Incumbent& incumbent,
                                       const Dataset& data, std::uint64_t seed,
                                       const AcquisitionSearch& search = {});

/// Surrogate state reported for each iteration. Ensemble-only and
/// kriging-only fields are left empty by the other method so both traces
/// share one schema.
struct SurrogateDiagnostics {
  std::size_t members_total = 0;
  std::size_t members_retained = 0;
  std::size_t dropped_weight = 0;
  std::size_t dropped_nrmse = 0;
  std::size_t dropped_nonfinite = 0;
  std::optional<double> small_fourier_scale;
  std::optional<double> large_fourier_scale;
  std::size_t small_escalations = 0;
  std::size_t large_escalations = 0;
  /// Largest training NRMSE and |last-layer weight| over retained members.
  std::optional<double> retained_max_nrmse;
  std::optional<double> retained_max_weight;
  std::vector<double> theta;
  std::optional<double> nugget;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t n_samples = 0;  // before this iteration's sample
  Point x_star;               // acquisition maximizer, original units
  double ei_star = 0.0;
  std::optional<Point> x_added;
  std::optional<double> hf_value;
  double f_min_after = 0.0;
  SurrogateDiagnostics diagnostics;
};

struct RunState {
  explicit RunState(Bounds bounds) : dataset(std::move(bounds)) {}

  std::size_t iteration = 0;
  Dataset dataset;
  Incumbent incumbent;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool budget_exhausted = false;
  double ei_tolerance = 0.0;
  std::size_t max_iterations = 0;
  std::size_t n_initial = 0;

  std::size_t adaptive_samples() const noexcept { return dataset.size() - n_initial; }
};

struct LoopSettings {
  /// Initial design in original units. Empty means an LHS of n_init points.
  std::vector<Point> initial_design;
  std::optional<std::size_t> n_init;
  /// Stop once max EI < ei_tolerance * max(1, |f_min|).
  double ei_tolerance = 1e-4;
  /// Cap on adaptive samples; defaults to 50 * d.
  std::optional<std::size_t> max_iterations;
  std::uint64_t seed = 0;
  AcquisitionSearch search;
};

/// 3 for d = 1, otherwise max(8, 2d + 2).
std::size_t default_n_init(std::size_t d) noexcept;
std::size_t default_max_iterations(std::size_t d) noexcept;

/// Initial design the loop uses: the explicit points, or an LHS seeded from
/// the run seed (identical across methods for the same seed).
std::vector<Point> initial_design(const Bounds& bounds, const LoopSettings& settings);

struct SurrogateStep {
  BatchAcquisition acquisition;  // EI against the current f_min
  SurrogateDiagnostics diagnostics;
};

/// Builds a surrogate for the current data; `iteration` counts builds from 0.
using SurrogateFactory =
    std::function<SurrogateStep(const Dataset& data, const Incumbent& incumbent, std::size_t iteration)>;
using IterationObserver = std::function<void(const RunState&, const IterationRecord&)>;

/// Sequential design loop shared by the ensemble and kriging methods:
/// build, maximize EI, then stop or sample the high-fidelity function.
RunState run_surrogate_loop(const ScalarFunction& hf, const Bounds& bounds,
                            const LoopSettings& settings, const SurrogateFactory& factory,
                            const IterationObserver& observer = {});

struct AdaptiveProblem {
  ScalarFunction hf;  // original units
  E2nnModel::EmulatorSet emulators;
  Bounds bounds;
};

struct AdaptiveSettings : LoopSettings {
  EnsembleConfig ensemble;
};

/// Ensemble-driven adaptive optimization. Fourier scales escalated in one
/// iteration carry over to the next. Calls `on_ensemble` with each built
/// ensemble (for manifests) when provided.
RunState run_adaptive(const AdaptiveProblem& problem, const AdaptiveSettings& settings,
                      const IterationObserver& observer = {},
                      const std::function<void(const Ensemble&)>& on_ensemble = {});

SurrogateDiagnostics diagnose(const Ensemble& ensemble);

}  // namespace e2nn
