#include "e2nn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "e2nn/error.hpp"

namespace e2nn {

namespace {

Architecture architecture_for(ArchitectureKind kind, const EnsembleConfig& config,
                              std::size_t n_train) {
  return kind == ArchitectureKind::Small
             ? Architecture::small(n_train)
             : Architecture::large(config.large_first_width, config.large_second_width);
}

Activation activation_for(const ActivationSlot& slot, double arch_scale) {
  return slot.kind == Activation::Kind::Swish ? Activation::swish()
                                              : Activation::fourier(slot.multiplier * arch_scale);
}

bool is_fourier(const MemberRecord& r) { return r.slot.kind == Activation::Kind::Fourier; }

}  // namespace

void EnsembleConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (replicates_per_unique_model == 0) fail("replicates_per_unique_model must be >= 1");
  if (activations.empty()) fail("at least one activation is required");
  if (architectures.empty()) fail("at least one architecture is required");
  for (const auto& slot : activations) {
    if (!(slot.multiplier > 0.0)) fail("activation multipliers must be positive");
  }
  if (!(small_fourier_scale > 0.0) || !(large_fourier_scale > 0.0)) fail("Fourier scales must be > 0");
  if (!(scale_escalation_factor > 1.0)) fail("scale_escalation_factor must be > 1");
  if (!(weight_tolerance > 0.0) || !(nrmse_tolerance > 0.0)) fail("tolerances must be > 0");
  if (min_members < 4) fail("min_members must be >= 4 so the predictive t has dof >= 3");
  if (member_count() < min_members) fail("ensemble has fewer members than min_members");
  if (!(rcond > 0.0 && rcond < 1.0)) fail("rcond must lie in (0, 1)");
  if (large_first_width == 0 || large_second_width == 0) fail("large widths must be >= 1");
}

std::string_view to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::WeightMagnitude: return "WeightMagnitude";
    case DropReason::TrainingNrmse: return "TrainingNrmse";
    case DropReason::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

std::optional<DropReason> drop_reason_from_string(std::string_view s) noexcept {
  for (auto r : {DropReason::WeightMagnitude, DropReason::TrainingNrmse, DropReason::NonFinite}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<DropReason> screen_member(const TrainingStats& stats, const EnsembleConfig& config) {
  if (!std::isfinite(stats.max_abs_weight) || !std::isfinite(stats.training_nrmse)) {
    return DropReason::NonFinite;
  }
  if (stats.max_abs_weight > config.weight_tolerance) return DropReason::WeightMagnitude;
  if (stats.training_nrmse > config.nrmse_tolerance) return DropReason::TrainingNrmse;
  return std::nullopt;
}

EscalationPlan plan_escalation(std::span<const MemberRecord> records) {
  std::size_t total[2] = {0, 0};
  std::size_t dropped[2] = {0, 0};
  for (const auto& r : records) {
    if (!is_fourier(r)) continue;
    const int a = r.architecture == ArchitectureKind::Small ? 0 : 1;
    ++total[a];
    if (r.dropped) ++dropped[a];
  }
  return {2 * dropped[0] > total[0], 2 * dropped[1] > total[1]};
}

Ensemble Ensemble::build(const Dataset& data, E2nnModel::EmulatorSet emulators,
                         const EnsembleConfig& config) {
  config.validate();
  if (data.empty()) throw Error(ErrorCode::EmptyInput, "cannot build an ensemble without data");
  if (!emulators) emulators = std::make_shared<const std::vector<Emulator>>();

  Ensemble ens;
  ens.config_ = config;
  ens.small_scale_ = config.small_fourier_scale;
  ens.large_scale_ = config.large_fourier_scale;
  ens.fingerprint_ = data.fingerprint();

  // Member order: architecture, then activation slot, then replicate.
  for (ArchitectureKind arch : config.architectures) {
    for (const ActivationSlot& slot : config.activations) {
      for (std::size_t rep = 0; rep < config.replicates_per_unique_model; ++rep) {
        MemberRecord r;
        r.index = ens.records_.size();
        r.architecture = arch;
        r.slot = slot;
        r.seed = config.base_seed + r.index;
        ens.records_.push_back(r);
      }
    }
  }

  std::vector<std::optional<E2nnModel>> trained(ens.records_.size());
  auto train = [&](MemberRecord& r) {
    const double arch_scale =
        r.architecture == ArchitectureKind::Small ? ens.small_scale_ : ens.large_scale_;
    r.activation = activation_for(r.slot, arch_scale);
    const ModelConfig mc{architecture_for(r.architecture, config, data.size()), r.activation,
                         data.dim()};
    try {
      E2nnModel model = E2nnModel::init(mc, emulators, r.seed).train_last_layer(data, config.rcond);
      r.stats = model.stats();
      r.dropped = screen_member(r.stats, config);
      trained[r.index] = std::move(model);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      r.stats = TrainingStats{std::nan(""), std::nan(""), data.size()};
      r.dropped = DropReason::NonFinite;
      trained[r.index].reset();
    }
  };

  for (auto& r : ens.records_) train(r);

  for (;;) {
    EscalationPlan plan = plan_escalation(ens.records_);
    plan.small = plan.small && ens.small_escalations_ < config.max_escalations;
    plan.large = plan.large && ens.large_escalations_ < config.max_escalations;
    if (!plan.small && !plan.large) break;
    if (plan.small) {
      ens.small_scale_ *= config.scale_escalation_factor;
      ++ens.small_escalations_;
    }
    if (plan.large) {
      ens.large_scale_ *= config.scale_escalation_factor;
      ++ens.large_escalations_;
    }
    for (auto& r : ens.records_) {
      if (!is_fourier(r)) continue;
      const bool small = r.architecture == ArchitectureKind::Small;
      if ((small && plan.small) || (!small && plan.large)) train(r);
    }
  }

  for (const auto& r : ens.records_) {
    if (!r.dropped) ens.members_.push_back(std::move(*trained[r.index]));
  }
  if (ens.members_.size() < config.min_members) {
    std::ostringstream msg;
    msg << ens.members_.size() << " of " << ens.records_.size()
        << " members survived filtering (need " << config.min_members << "); dropped:";
    for (const auto& r : ens.records_) {
      if (r.dropped) msg << " #" << r.index << '=' << to_string(*r.dropped);
    }
    msg << "; fourier scales small=" << ens.small_scale_ << " large=" << ens.large_scale_;
    throw Error(ErrorCode::EnsembleCollapse, msg.str());
  }
  return ens;
}

Ensemble Ensemble::restore(EnsembleConfig config, std::vector<MemberRecord> records,
                           std::vector<E2nnModel> members, double small_scale, double large_scale,
                           std::size_t small_escalations, std::size_t large_escalations,
                           std::uint64_t dataset_fingerprint) {
  const auto retained = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.dropped; }));
  if (retained != members.size()) {
    throw Error(ErrorCode::DimensionMismatch, "retained record count does not match member models");
  }
  if (members.size() < 2) throw Error(ErrorCode::EnsembleCollapse, "restored ensemble too small");
  Ensemble ens;
  ens.config_ = std::move(config);
  ens.records_ = std::move(records);
  ens.members_ = std::move(members);
  ens.small_scale_ = small_scale;
  ens.large_scale_ = large_scale;
  ens.small_escalations_ = small_escalations;
  ens.large_escalations_ = large_escalations;
  ens.fingerprint_ = dataset_fingerprint;
  return ens;
}

std::size_t Ensemble::dropped_count(DropReason reason) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [&](const auto& r) { return r.dropped == reason; }));
}

Matrix Ensemble::member_predictions(const Matrix& x_scaled) const {
  Matrix out(static_cast<Eigen::Index>(members_.size()), x_scaled.rows());
  if (members_.empty()) return out;
  // Every member shares the emulator set, so evaluate it once.
  const Matrix raw = evaluate_emulators(*members_.front().emulators(), x_scaled);
  for (std::size_t m = 0; m < members_.size(); ++m) {
    out.row(static_cast<Eigen::Index>(m)) = members_[m].predict(x_scaled, raw).transpose();
  }
  return out;
}

std::vector<TPrediction> Ensemble::posterior_predictive(const Matrix& x_scaled) const {
  const Matrix preds = member_predictions(x_scaled);
  std::vector<TPrediction> out;
  out.reserve(static_cast<std::size_t>(x_scaled.rows()));
  std::vector<double> column(members_.size());
  for (Eigen::Index i = 0; i < preds.cols(); ++i) {
    for (std::size_t m = 0; m < members_.size(); ++m) {
      column[m] = preds(static_cast<Eigen::Index>(m), i);
    }
    out.push_back(fuse_predictions(column));
  }
  return out;
}

TPrediction Ensemble::posterior_predictive(std::span<const double> x_scaled) const {
  Matrix x(1, static_cast<Eigen::Index>(x_scaled.size()));
  for (std::size_t j = 0; j < x_scaled.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = x_scaled[j];
  return posterior_predictive(x).front();
}

}  // namespace e2nn
