#include "e2nn/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

double forrester_hf(double x) {
  const double a = 6.0 * x - 2.0;
  return a * a * std::sin(12.0 * x - 4.0);
}

double nonstationary_hf(double x1, double x2) {
  const double u = x1 - 0.9;
  return std::sin(21.0 * u * u * u * u) * std::cos(2.0 * u) + (x1 - 0.7) / 2.0 +
         2.0 * x2 * x2 * std::sin(x1 * x2);
}

}  // namespace

E2nnModel::EmulatorSet BenchmarkProblem::emulator_set() const {
  return std::make_shared<const std::vector<Emulator>>(lf_list);
}

BenchmarkProblem forrester_pair() {
  BenchmarkProblem p;
  p.name = "forrester";
  p.d = 1;
  p.bounds = {{0.0, 1.0}};
  p.hf = [](std::span<const double> x) { return forrester_hf(x[0]); };
  p.lf_list.push_back(emulator_from_original(
      "forrester_lf",
      [](std::span<const double> x) {
        return 0.5 * forrester_hf(x[0]) + 10.0 * (x[0] - 0.5) - 5.0;
      },
      p.bounds));
  // Minimizer located by bounded scalar minimization to 1e-12.
  p.known_optimum = KnownOptimum{{0.7572487561660257}, -6.020740055767081};
  p.initial_design = {{0.0}, {0.5}, {1.0}};
  p.description = "1-D Forrester function with a linearly deviated LF model";
  return p;
}

BenchmarkProblem nonstationary_2d_pair() {
  BenchmarkProblem p;
  p.name = "nonstationary2d";
  p.d = 2;
  p.bounds = {{0.05, 1.05}, {0.0, 1.0}};
  p.hf = [](std::span<const double> x) { return nonstationary_hf(x[0], x[1]); };
  p.lf_list.push_back(emulator_from_original(
      "nonstationary2d_lf",
      [](std::span<const double> x) {
        return (nonstationary_hf(x[0], x[1]) - 2.0 + x[0] + x[1]) /
               (1.0 + 0.25 * x[0] + 0.5 * x[1]);
      },
      p.bounds));
  // Reference minimizer from a 2001 x 2001 grid search refined by a bounded
  // local polish; the minimum sits on the x2 = 0 edge. Regenerated by
  // tests/test_problems.cpp ("2-D optimum fixture matches the grid oracle").
  p.known_optimum = KnownOptimum{{0.22117339792923482, 0.0}, -0.44420103554130275};
  p.description = "2-D nonstationary function with a nonlinearly deviated LF model";
  return p;
}

BenchmarkProblem linear_lf_sanity() {
  BenchmarkProblem p;
  p.name = "linear";
  p.d = 2;
  p.bounds = {{0.0, 1.0}, {0.0, 1.0}};
  p.hf = [](std::span<const double> x) { return 2.0 * (x[0] + x[1]) + 3.0; };
  p.lf_list.push_back(emulator_from_original(
      "linear_lf", [](std::span<const double> x) { return x[0] + x[1]; }, p.bounds));
  p.known_optimum = KnownOptimum{{0.0, 0.0}, 3.0};
  p.description = "HF is an affine function of the LF model";
  return p;
}

BenchmarkProblem high_frequency_sine() {
  BenchmarkProblem p;
  p.name = "sine40";
  p.d = 1;
  p.bounds = {{0.0, 1.0}};
  p.hf = [](std::span<const double> x) { return std::sin(40.0 * x[0]); };
  p.known_optimum = KnownOptimum{{1.5 * std::numbers::pi / 40.0}, -1.0};
  p.description = "sin(40x) without emulators";
  return p;
}

std::vector<std::string> problem_names() {
  return {"forrester", "nonstationary2d", "linear", "sine40"};
}

BenchmarkProblem problem_by_name(std::string_view name) {
  if (name == "forrester") return forrester_pair();
  if (name == "nonstationary2d") return nonstationary_2d_pair();
  if (name == "linear") return linear_lf_sanity();
  if (name == "sine40") return high_frequency_sine();
  std::string msg = "unknown problem '" + std::string(name) + "'; available:";
  for (const auto& n : problem_names()) msg += " " + n;
  throw Error(ErrorCode::InvalidArgument, msg);
}

}  // namespace e2nn
