#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace e2nn {

using Point = std::vector<double>;
using ScalarFunction = std::function<double(std::span<const double>)>;

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};
using Bounds = std::vector<Interval>;

/// Affine per-dimension map from [lo, hi] onto [-1, 1].
Point to_scaled(std::span<const double> x, const Bounds& bounds);
Point to_original(std::span<const double> z, const Bounds& bounds);

/// A cheap low-fidelity information source. `evaluate` takes a point in the
/// scaled domain [-1, 1]^d and must be deterministic.
struct Emulator {
  std::string name;
  ScalarFunction evaluate;
};

/// Wrap a function of original-unit inputs so it can be embedded in a network
/// that works on scaled inputs.
Emulator emulator_from_original(std::string name, ScalarFunction fn, Bounds bounds);

}  // namespace e2nn
