#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2nn/emulator.hpp"
#include "e2nn/linalg.hpp"

namespace e2nn {

/// High-fidelity samples, kept both in original units and in the scaled
/// [-1, 1]^d domain the networks see.
class Dataset {
 public:
  explicit Dataset(Bounds bounds);

  void add(std::span<const double> x_original, double y);

  std::size_t size() const noexcept { return y_.size(); }
  bool empty() const noexcept { return y_.empty(); }
  std::size_t dim() const noexcept { return bounds_.size(); }
  const Bounds& bounds() const noexcept { return bounds_; }

  const Point& x(std::size_t i) const { return x_[i]; }
  const Point& x_scaled(std::size_t i) const { return x_scaled_[i]; }
  double y(std::size_t i) const { return y_[i]; }
  std::span<const double> ys() const noexcept { return y_; }

  /// n x d matrix of scaled inputs.
  Matrix scaled_matrix() const;

  std::size_t argmin() const;

  /// FNV-1a over the raw bytes of the inputs and responses.
  std::uint64_t fingerprint() const noexcept;

 private:
  Bounds bounds_;
  std::vector<Point> x_;
  std::vector<Point> x_scaled_;
  std::vector<double> y_;
};

}  // namespace e2nn
