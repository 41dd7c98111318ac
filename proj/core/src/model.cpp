#include "e2nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

// Rows per block when evaluating large batches; bounds the size of the
// n x 5000 activation matrix of the large network.
constexpr Eigen::Index kPredictChunk = 256;

void activate(Eigen::Ref<Matrix> pre, const Activation& act) {
  if (act.kind == Activation::Kind::Fourier) {
    pre.array() = (act.scale * pre.array()).sin();
  } else {
    pre.array() = pre.array() / (1.0 + (-pre.array()).exp());
  }
}

}  // namespace

std::string_view to_string(ArchitectureKind kind) noexcept {
  return kind == ArchitectureKind::Small ? "small" : "large";
}

Architecture Architecture::small(std::size_t n_train) {
  if (n_train == 0) throw Error(ErrorCode::EmptyInput, "small architecture needs n_train >= 1");
  return {ArchitectureKind::Small, {2 * n_train}};
}

Architecture Architecture::large(std::size_t first, std::size_t second) {
  if (first == 0 || second == 0) throw Error(ErrorCode::InvalidArgument, "empty hidden layer");
  return {ArchitectureKind::Large, {first, second}};
}

Activation Activation::fourier(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "Fourier scale must be positive");
  }
  return {Kind::Fourier, scale};
}

double Activation::operator()(double x) const noexcept {
  if (kind == Kind::Fourier) return std::sin(scale * x);
  return x / (1.0 + std::exp(-x));
}

Scaler Scaler::fit(std::span<const double> values) {
  Scaler s;
  if (values.empty()) return s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  s.mean = mean;
  const double sd = std::sqrt(var);
  s.std = (sd > 1e-12 * std::max(1.0, std::abs(mean))) ? sd : 1.0;
  return s;
}

Matrix evaluate_emulators(std::span<const Emulator> emulators, const Matrix& x_scaled) {
  Matrix out(x_scaled.rows(), static_cast<Eigen::Index>(emulators.size()));
  std::vector<double> row(static_cast<std::size_t>(x_scaled.cols()));
  for (Eigen::Index i = 0; i < x_scaled.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_scaled.cols(); ++j) row[j] = x_scaled(i, j);
    for (std::size_t e = 0; e < emulators.size(); ++e) {
      out(i, static_cast<Eigen::Index>(e)) = emulators[e].evaluate(row);
    }
  }
  return out;
}

E2nnModel E2nnModel::init(const ModelConfig& config, EmulatorSet emulators, std::uint64_t seed) {
  if (config.input_dim < 1) throw Error(ErrorCode::InvalidArgument, "input_dim must be >= 1");
  if (config.architecture.hidden_layer_sizes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "architecture has no hidden layers");
  }
  if (!emulators) emulators = std::make_shared<const std::vector<Emulator>>();

  E2nnModel model;
  model.config_ = config;
  model.seed_ = seed;
  model.emulators_ = std::move(emulators);
  model.emulator_scalers_.assign(model.emulators_->size(), Scaler{});

  const auto n_emu = model.emulators_->size();
  std::mt19937_64 rng(seed);
  const bool fourier = config.activation.kind == Activation::Kind::Fourier;
  std::uniform_real_distribution<double> bias_dist(fourier ? 0.0 : -4.0,
                                                   fourier ? 2.0 * std::numbers::pi : 4.0);

  auto layers = std::make_shared<std::vector<HiddenLayer>>();
  std::size_t fan_in = config.input_dim;
  for (std::size_t width : config.architecture.hidden_layer_sizes) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + width));
    std::normal_distribution<double> weight_dist(0.0, stddev);
    HiddenLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = weight_dist(rng);
    }
    layer.biases.resize(static_cast<Eigen::Index>(width));
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) layer.biases(r) = bias_dist(rng);
    layers->push_back(std::move(layer));
    // Emulator neurons of this layer feed the next one.
    fan_in = width + n_emu;
  }
  model.layers_ = std::move(layers);
  return model;
}

std::size_t E2nnModel::feature_count() const noexcept {
  return config_.architecture.hidden_layer_sizes.back() + emulator_count() + 1;
}

void E2nnModel::append_emulators(Eigen::Ref<Matrix> block, const Matrix& raw_emulators) const {
  for (Eigen::Index e = 0; e < raw_emulators.cols(); ++e) {
    const Scaler& s = emulator_scalers_[static_cast<std::size_t>(e)];
    block.col(e) = (raw_emulators.col(e).array() - s.mean) / s.std;
  }
}

Matrix E2nnModel::hidden_features(const Matrix& x_scaled, const Matrix& raw_emulators) const {
  if (static_cast<std::size_t>(x_scaled.cols()) != config_.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "input dimension does not match the model");
  }
  if (static_cast<std::size_t>(raw_emulators.cols()) != emulator_count() ||
      raw_emulators.rows() != x_scaled.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "emulator matrix shape does not match");
  }
  const Eigen::Index n = x_scaled.rows();
  const auto n_emu = static_cast<Eigen::Index>(emulator_count());

  Matrix input = x_scaled;
  for (std::size_t l = 0; l < layers_->size(); ++l) {
    const HiddenLayer& layer = (*layers_)[l];
    const Eigen::Index width = layer.weights.rows();
    const bool last = l + 1 == layers_->size();
    Matrix next(n, width + n_emu + (last ? 1 : 0));
    next.leftCols(width).noalias() = input * layer.weights.transpose();
    next.leftCols(width).rowwise() += layer.biases.transpose();
    activate(next.leftCols(width), config_.activation);
    append_emulators(next.middleCols(width, n_emu), raw_emulators);
    if (last) next.col(width + n_emu).setOnes();
    input = std::move(next);
  }
  if (!input.allFinite()) {
    throw Error(ErrorCode::NonFinite, "non-finite activation or emulator output");
  }
  return input;
}

Vector E2nnModel::hidden_features(std::span<const double> x_scaled) const {
  Matrix x(1, static_cast<Eigen::Index>(x_scaled.size()));
  for (std::size_t j = 0; j < x_scaled.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = x_scaled[j];
  const Matrix raw = evaluate_emulators(*emulators_, x);
  return hidden_features(x, raw).row(0).transpose();
}

E2nnModel E2nnModel::train_last_layer(const Dataset& data, double rcond) const {
  if (data.empty()) throw Error(ErrorCode::EmptyInput, "training data is empty");
  if (data.dim() != config_.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "training data dimension does not match the model");
  }
  E2nnModel out = *this;
  const Matrix x = data.scaled_matrix();
  const Matrix raw = evaluate_emulators(*emulators_, x);
  for (Eigen::Index e = 0; e < raw.cols(); ++e) {
    const Vector col = raw.col(e);
    out.emulator_scalers_[static_cast<std::size_t>(e)] =
        Scaler::fit(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
  }
  out.target_scaler_ = Scaler::fit(data.ys());

  const Matrix design = out.hidden_features(x, raw);
  Vector targets(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    targets(static_cast<Eigen::Index>(i)) = out.target_scaler_.apply(data.y(i));
  }
  RegressionSolution sol = pinv_solve(design, targets, rcond);
  out.stats_ = TrainingStats{sol.max_abs_weight, sol.residual_nrmse, data.size()};
  out.output_weights_ = std::move(sol.weights);
  return out;
}

const Vector& E2nnModel::output_weights() const {
  if (!output_weights_) throw Error(ErrorCode::UntrainedModel, "model has not been trained");
  return *output_weights_;
}

double E2nnModel::predict(std::span<const double> x_scaled) const {
  const Vector& w = output_weights();
  return target_scaler_.invert(hidden_features(x_scaled).dot(w));
}

Vector E2nnModel::predict(const Matrix& x_scaled, const Matrix& raw_emulators) const {
  const Vector& w = output_weights();
  Vector out(x_scaled.rows());
  for (Eigen::Index start = 0; start < x_scaled.rows(); start += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, x_scaled.rows() - start);
    const Matrix features =
        hidden_features(x_scaled.middleRows(start, len), raw_emulators.middleRows(start, len));
    out.segment(start, len) = features * w;
  }
  return (out.array() * target_scaler_.std + target_scaler_.mean).matrix();
}

Vector E2nnModel::predict(const Matrix& x_scaled) const {
  return predict(x_scaled, evaluate_emulators(*emulators_, x_scaled));
}

E2nnModel E2nnModel::restore(const ModelConfig& config, EmulatorSet emulators, std::uint64_t seed,
                             Scaler target_scaler, std::vector<Scaler> emulator_scalers,
                             Vector output_weights, TrainingStats stats) {
  E2nnModel model = init(config, std::move(emulators), seed);
  if (emulator_scalers.size() != model.emulator_count()) {
    throw Error(ErrorCode::DimensionMismatch, "emulator scaler count does not match emulators");
  }
  if (static_cast<std::size_t>(output_weights.size()) != model.feature_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "output weight count " + std::to_string(output_weights.size()) +
                    " does not match feature count " + std::to_string(model.feature_count()));
  }
  model.target_scaler_ = target_scaler;
  model.emulator_scalers_ = std::move(emulator_scalers);
  model.output_weights_ = std::move(output_weights);
  model.stats_ = stats;
  return model;
}

}  // namespace e2nn
