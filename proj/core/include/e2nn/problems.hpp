#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "e2nn/emulator.hpp"
#include "e2nn/model.hpp"

namespace e2nn {

struct KnownOptimum {
  Point x;
  double y = 0.0;
};

/// An analytic high-fidelity function with its low-fidelity companions.
/// `lf_list` emulators take scaled inputs; `hf` takes original units.
struct BenchmarkProblem {
  std::string name;
  std::size_t d = 1;
  Bounds bounds;
  ScalarFunction hf;
  std::vector<Emulator> lf_list;
  std::optional<KnownOptimum> known_optimum;
  /// Default starting samples (original units); empty means LHS.
  std::vector<Point> initial_design;
  std::string description;

  E2nnModel::EmulatorSet emulator_set() const;
};

/// y_HF = (6x-2)^2 sin(12x-4), y_LF = 0.5 y_HF + 10(x-0.5) - 5 on [0, 1].
BenchmarkProblem forrester_pair();

/// Nonstationary 2-D function on [0.05, 1.05] x [0, 1] with a nonlinearly
/// deviated LF model.
BenchmarkProblem nonstationary_2d_pair();

/// HF = 2 LF + 3 with LF = x1 + x2 on [0, 1]^2.
BenchmarkProblem linear_lf_sanity();

/// sin(40 x) on [0, 1] without emulators; stresses the Fourier escalation.
BenchmarkProblem high_frequency_sine();

std::vector<std::string> problem_names();
/// Throws InvalidArgument listing the available names.
BenchmarkProblem problem_by_name(std::string_view name);

}  // namespace e2nn
