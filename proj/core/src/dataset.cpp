#include "e2nn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "e2nn/error.hpp"

namespace e2nn {

Point to_scaled(std::span<const double> x, const Bounds& bounds) {
  if (x.size() != bounds.size()) throw Error(ErrorCode::DimensionMismatch, "to_scaled: dimension");
  Point z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto [lo, hi] = bounds[j];
    z[j] = 2.0 * (x[j] - lo) / (hi - lo) - 1.0;
  }
  return z;
}

Point to_original(std::span<const double> z, const Bounds& bounds) {
  if (z.size() != bounds.size()) throw Error(ErrorCode::DimensionMismatch, "to_original: dimension");
  Point x(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const auto [lo, hi] = bounds[j];
    x[j] = lo + 0.5 * (z[j] + 1.0) * (hi - lo);
  }
  return x;
}

Emulator emulator_from_original(std::string name, ScalarFunction fn, Bounds bounds) {
  return Emulator{std::move(name),
                  [fn = std::move(fn), bounds = std::move(bounds)](std::span<const double> z) {
                    const Point x = to_original(z, bounds);
                    return fn(x);
                  }};
}

Dataset::Dataset(Bounds bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw Error(ErrorCode::EmptyInput, "dataset needs at least one dimension");
  for (const auto& b : bounds_) {
    if (!(b.hi > b.lo)) throw Error(ErrorCode::InvalidArgument, "bounds must satisfy lo < hi");
  }
}

void Dataset::add(std::span<const double> x_original, double y) {
  if (x_original.size() != bounds_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sample dimension does not match bounds");
  }
  if (!std::isfinite(y) ||
      !std::all_of(x_original.begin(), x_original.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFinite, "dataset sample is not finite");
  }
  x_.emplace_back(x_original.begin(), x_original.end());
  x_scaled_.push_back(to_scaled(x_original, bounds_));
  y_.push_back(y);
}

Matrix Dataset::scaled_matrix() const {
  Matrix m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < dim(); ++j) m(i, j) = x_scaled_[i][j];
  }
  return m;
}

std::size_t Dataset::argmin() const {
  if (y_.empty()) throw Error(ErrorCode::EmptyInput, "argmin of empty dataset");
  return static_cast<std::size_t>(std::min_element(y_.begin(), y_.end()) - y_.begin());
}

std::uint64_t Dataset::fingerprint() const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t i = 0; i < size(); ++i) {
    for (double v : x_[i]) mix(v);
    mix(y_[i]);
  }
  return h;
}

}  // namespace e2nn
