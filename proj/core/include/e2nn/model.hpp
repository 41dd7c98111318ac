#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "e2nn/dataset.hpp"
#include "e2nn/emulator.hpp"
#include "e2nn/linalg.hpp"

namespace e2nn {

enum class ArchitectureKind { Small, Large };

std::string_view to_string(ArchitectureKind kind) noexcept;

struct Architecture {
  ArchitectureKind kind = ArchitectureKind::Small;
  std::vector<std::size_t> hidden_layer_sizes;

  /// One hidden layer of 2 * n_train neurons.
  static Architecture small(std::size_t n_train);
  /// Two hidden layers. The defaults are the 200/5000 network; tests shrink it.
  static Architecture large(std::size_t first = 200, std::size_t second = 5000);

  bool operator==(const Architecture&) const = default;
};

struct Activation {
  enum class Kind { Swish, Fourier };
  Kind kind = Kind::Swish;
  /// Frequency multiplier of a Fourier neuron, sin(scale * x). Unused for Swish.
  double scale = 1.0;

  static Activation swish() { return {Kind::Swish, 1.0}; }
  static Activation fourier(double scale);

  double operator()(double x) const noexcept;
  bool operator==(const Activation&) const = default;
};

struct Scaler {
  double mean = 0.0;
  double std = 1.0;

  /// Zero mean, unit population variance. Constant data keeps std = 1.
  static Scaler fit(std::span<const double> values);
  double apply(double v) const noexcept { return (v - mean) / std; }
  double invert(double v) const noexcept { return v * std + mean; }
  bool operator==(const Scaler&) const = default;
};

struct ModelConfig {
  Architecture architecture;
  Activation activation;
  std::size_t input_dim = 1;
};

struct TrainingStats {
  double max_abs_weight = 0.0;
  double training_nrmse = 0.0;
  std::size_t n_train = 0;
};

/// n x E matrix of raw emulator outputs at the rows of `x_scaled`.
Matrix evaluate_emulators(std::span<const Emulator> emulators, const Matrix& x_scaled);

/// Random-feature network with the emulators embedded as extra neurons in every
/// hidden layer. Hidden weights are drawn once from the seed and never change;
/// only the output layer is fitted.
class E2nnModel {
 public:
  using EmulatorSet = std::shared_ptr<const std::vector<Emulator>>;

  static E2nnModel init(const ModelConfig& config, EmulatorSet emulators, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t emulator_count() const noexcept { return emulators_ ? emulators_->size() : 0; }
  const EmulatorSet& emulators() const noexcept { return emulators_; }

  /// Last hidden width + emulator count + 1 (constant bias feature).
  std::size_t feature_count() const noexcept;

  const Matrix& hidden_weights(std::size_t layer) const { return (*layers_)[layer].weights; }
  const Vector& hidden_biases(std::size_t layer) const { return (*layers_)[layer].biases; }
  std::size_t hidden_layer_count() const noexcept { return layers_->size(); }

  Vector hidden_features(std::span<const double> x_scaled) const;
  /// Features for every row of `x_scaled`, given the raw emulator outputs at
  /// those rows (see evaluate_emulators).
  Matrix hidden_features(const Matrix& x_scaled, const Matrix& raw_emulators) const;

  /// Fit the output layer by stabilized pseudoinverse on `data`. Returns a
  /// trained copy that shares the frozen hidden layers with this model.
  E2nnModel train_last_layer(const Dataset& data, double rcond = kDefaultRcond) const;

  bool trained() const noexcept { return output_weights_.has_value(); }
  double predict(std::span<const double> x_scaled) const;
  Vector predict(const Matrix& x_scaled, const Matrix& raw_emulators) const;
  Vector predict(const Matrix& x_scaled) const;

  const Vector& output_weights() const;
  const Scaler& target_scaler() const noexcept { return target_scaler_; }
  const std::vector<Scaler>& emulator_scalers() const noexcept { return emulator_scalers_; }
  const TrainingStats& stats() const noexcept { return stats_; }

  /// Rebuild a trained model from persisted state. Hidden layers are redrawn
  /// from the seed.
  static E2nnModel restore(const ModelConfig& config, EmulatorSet emulators, std::uint64_t seed,
                           Scaler target_scaler, std::vector<Scaler> emulator_scalers,
                           Vector output_weights, TrainingStats stats);

 private:
  struct HiddenLayer {
    Matrix weights;  // width x fan_in
    Vector biases;
  };

  E2nnModel() = default;
  void append_emulators(Eigen::Ref<Matrix> block, const Matrix& raw_emulators) const;

  ModelConfig config_;
  std::uint64_t seed_ = 0;
  EmulatorSet emulators_;
  std::shared_ptr<const std::vector<HiddenLayer>> layers_;
  Scaler target_scaler_;
  std::vector<Scaler> emulator_scalers_;
  std::optional<Vector> output_weights_;
  TrainingStats stats_;
};

}  // namespace e2nn
