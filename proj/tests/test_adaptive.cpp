#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "e2nn/adaptive.hpp"
#include "e2nn/design.hpp"
#include "e2nn/error.hpp"
#include "e2nn/gpr.hpp"
#include "e2nn/problems.hpp"

using namespace e2nn;

namespace {

std::size_t stratum(double z, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::floor((z + 1.0) / 2.0 * static_cast<double>(n)));
  return std::min(k, n - 1);
}

AdaptiveSettings quick_settings(std::uint64_t seed) {
  AdaptiveSettings s;
  s.seed = seed;
  s.ensemble.large_first_width = 20;
  s.ensemble.large_second_width = 200;
  s.search.candidates_per_dim = 512;
  s.search.polish_evals = 20;
  return s;
}

AdaptiveProblem as_adaptive(const BenchmarkProblem& p) { return {p.hf, p.emulator_set(), p.bounds}; }

}  // namespace

TEST_CASE("Latin hypercube stratification") {
  SUBCASE("n = 4, d = 1") {
    const auto pts = lhs_design(4, 1, 3);
    std::set<std::size_t> hit;
    for (const auto& p : pts) {
      CHECK(p[0] >= -1.0);
      CHECK(p[0] <= 1.0);
      hit.insert(stratum(p[0], 4));
    }
    CHECK(hit.size() == 4);
  }
  SUBCASE("n = 8, d = 2 for several seeds") {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto pts = lhs_design(8, 2, seed);
      for (std::size_t j = 0; j < 2; ++j) {
        std::set<std::size_t> hit;
        for (const auto& p : pts) hit.insert(stratum(p[j], 8));
        CHECK(hit.size() == 8);
      }
    }
  }
  CHECK(lhs_design(8, 2, 1) == lhs_design(8, 2, 1));
  CHECK(lhs_design(8, 2, 1) != lhs_design(8, 2, 2));
  CHECK_THROWS_AS((void)lhs_design(0, 2, 1), Error);
}

TEST_CASE("Halton candidates stay in the scaled box") {
  const auto pts = halton_points(1000, 3, 5);
  REQUIRE(pts.size() == 1000);
  for (const auto& p : pts) {
    for (double v : p) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(halton_points(10, 2, 5) == halton_points(10, 2, 5));
  CHECK(halton_points(10, 2, 5) != halton_points(10, 2, 6));
}

TEST_CASE("dataset scaling") {
  Dataset d({{0.05, 1.05}, {0.0, 1.0}});
  d.add(std::vector<double>{0.05, 1.0}, 2.0);
  d.add(std::vector<double>{0.55, 0.25}, -1.0);
  CHECK(d.x_scaled(0) == Point{-1.0, 1.0});
  CHECK(d.x_scaled(1)[0] == doctest::Approx(0.0));
  CHECK(d.x_scaled(1)[1] == doctest::Approx(-0.5));
  CHECK(d.argmin() == 1);
  const Point back = to_original(d.x_scaled(1), d.bounds());
  CHECK(back[0] == doctest::Approx(0.55));
  CHECK(back[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(d.add(std::vector<double>{0.1}, 0.0), Error);
  CHECK_THROWS_AS(d.add(std::vector<double>{0.1, 0.1}, NAN), Error);
  CHECK_THROWS_AS(Dataset({{1.0, 1.0}}), Error);
  Dataset e({{0.05, 1.05}, {0.0, 1.0}});
  e.add(std::vector<double>{0.05, 1.0}, 2.0);
  CHECK(e.fingerprint() != d.fingerprint());
}

TEST_CASE("defaults") {
  CHECK(default_n_init(1) == 3);
  CHECK(default_n_init(2) == 8);
  CHECK(default_n_init(5) == 12);
  CHECK(default_max_iterations(1) == 50);
  CHECK(default_max_iterations(3) == 150);

  LoopSettings s;
  s.seed = 4;
  const Bounds b{{0.0, 1.0}, {0.0, 1.0}};
  CHECK(initial_design(b, s).size() == 8);
  CHECK(initial_design(b, s) == initial_design(b, s));
  s.initial_design = {{0.1, 0.1}, {0.2, 0.3}};
  CHECK(initial_design(b, s) == s.initial_design);
}

TEST_CASE("acquisition maximizer") {
  SUBCASE("EI that is zero everywhere except a gap") {
    const std::vector<Point> existing{{-1.0}, {-0.5}, {0.0}, {1.0}};
    BatchAcquisition acq = [](const Matrix& x) {
      Vector v(x.rows());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double z = x(i, 0);
        v(i) = z > 0.0 && z < 1.0 ? z * (1.0 - z) : 0.0;
      }
      return v;
    };
    const auto r = maximize_acquisition(acq, existing, 1, 7);
    CHECK(r.x_scaled[0] > 0.0);
    CHECK(r.x_scaled[0] < 1.0);
    CHECK(r.x_scaled[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.ei == doctest::Approx(0.25).epsilon(1e-6));
  }
  SUBCASE("a peak on an existing sample is not re-sampled") {
    const std::vector<Point> existing{{0.3, -0.2}};
    BatchAcquisition acq = [](const Matrix& x) {
      return Vector((-(x.col(0).array() - 0.3).square() - (x.col(1).array() + 0.2).square()).exp());
    };
    AcquisitionSearch search;
    search.candidates_per_dim = 256;
    const auto r = maximize_acquisition(acq, existing, 2, 1, search);
    const double dist = std::max(std::abs(r.x_scaled[0] - 0.3), std::abs(r.x_scaled[1] + 0.2));
    CHECK(dist >= search.duplicate_guard);
    CHECK(r.ei > 0.99);
  }
  SUBCASE("ei_star dominates every candidate value") {
    std::vector<double> seen;
    BatchAcquisition acq = [&seen](const Matrix& x) {
      Vector v = (3.0 * x.col(0).array()).sin() * (2.0 * x.col(1).array()).cos();
      seen.insert(seen.end(), v.begin(), v.end());
      return v;
    };
    AcquisitionSearch search;
    search.candidates_per_dim = 128;
    const auto r = maximize_acquisition(acq, {}, 2, 3, search);
    CHECK(r.ei >= *std::max_element(seen.begin(), seen.end()));
    CHECK(r.evaluations == seen.size());
  }
}

TEST_CASE("first Forrester sample lands near 0.7545") {
  // Full-size ensemble; only the first acquisition of each seed is computed.
  const auto p = forrester_pair();
  int near = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AdaptiveSettings s;
    s.seed = seed;
    s.initial_design = p.initial_design;
    s.max_iterations = 0;
    const auto state = run_adaptive(as_adaptive(p), s);
    REQUIRE(state.history.size() == 1);
    if (std::abs(state.history.front().x_star[0] - 0.7545) <= 0.05) ++near;
  }
  CHECK(near >= 3);
}

TEST_CASE("adaptive loop invariants on Forrester") {
  const auto p = forrester_pair();
  AdaptiveSettings s = quick_settings(2);
  s.initial_design = p.initial_design;
  s.max_iterations = 6;
  std::vector<double> observed_fmin;
  const auto state = run_adaptive(as_adaptive(p), s, [&](const RunState& st, const IterationRecord& rec) {
    observed_fmin.push_back(rec.f_min_after);
    CHECK(st.incumbent.f_min == doctest::Approx(*std::min_element(st.dataset.ys().begin(), st.dataset.ys().end())));
  });

  CHECK(state.n_initial == 3);
  CHECK(state.history.size() == state.iteration);
  CHECK(std::is_sorted(observed_fmin.rbegin(), observed_fmin.rend()));
  CHECK(state.converged != state.budget_exhausted);
  for (std::size_t i = 0; i < state.dataset.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(std::abs(state.dataset.x_scaled(i)[0] - state.dataset.x_scaled(j)[0]) >= 1e-6);
    }
  }
  double f_before = std::min({state.dataset.y(0), state.dataset.y(1), state.dataset.y(2)});
  for (std::size_t i = 0; i + 1 < state.history.size(); ++i) {
    const auto& rec = state.history[i];
    CHECK(rec.x_added.has_value());
    CHECK(rec.ei_star >= s.ei_tolerance * std::max(1.0, std::abs(f_before)));
    f_before = rec.f_min_after;
  }
  CHECK_FALSE(state.history.back().x_added.has_value());
  CHECK(state.adaptive_samples() == state.history.size() - 1);

  SUBCASE("determinism") {
    const auto again = run_adaptive(as_adaptive(p), s);
    REQUIRE(again.dataset.size() == state.dataset.size());
    for (std::size_t i = 0; i < state.dataset.size(); ++i) {
      CHECK(again.dataset.x(i) == state.dataset.x(i));
      CHECK(again.dataset.y(i) == state.dataset.y(i));
    }
  }
}

TEST_CASE("infinite tolerance stops after the initial build") {
  const auto p = forrester_pair();
  AdaptiveSettings s = quick_settings(0);
  s.ei_tolerance = std::numeric_limits<double>::infinity();
  const auto state = run_adaptive(as_adaptive(p), s);
  CHECK(state.converged);
  CHECK(state.adaptive_samples() == 0);
  CHECK(state.history.size() == 1);
  CHECK(state.dataset.size() == default_n_init(1));
}

TEST_CASE("budget exhaustion is a flag, not an error") {
  const auto p = forrester_pair();
  AdaptiveSettings s = quick_settings(1);
  s.ei_tolerance = 0.0;
  s.max_iterations = 2;
  const auto state = run_adaptive(as_adaptive(p), s);
  CHECK(state.budget_exhausted);
  CHECK_FALSE(state.converged);
  CHECK(state.adaptive_samples() == 2);
}

TEST_CASE("both loops share the initial design for a seed") {
  const auto p = nonstationary_2d_pair();
  LoopSettings s;
  s.seed = 3;
  EgoSettings ego;
  static_cast<LoopSettings&>(ego) = s;
  ego.max_iterations = 0;
  AdaptiveSettings ada = quick_settings(3);
  ada.max_iterations = 0;
  const auto a = run_ego({p.hf, p.bounds}, ego);
  const auto b = run_adaptive(as_adaptive(p), ada);
  REQUIRE(a.dataset.size() == 8);
  REQUIRE(b.dataset.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(a.dataset.x(i) == b.dataset.x(i));
}

TEST_CASE("bad loop settings") {
  const auto p = forrester_pair();
  AdaptiveSettings s = quick_settings(0);
  s.n_init = 1;
  CHECK_THROWS_AS((void)run_adaptive(as_adaptive(p), s), Error);
  s = quick_settings(0);
  s.ei_tolerance = -1.0;
  CHECK_THROWS_AS((void)run_adaptive(as_adaptive(p), s), Error);
}
