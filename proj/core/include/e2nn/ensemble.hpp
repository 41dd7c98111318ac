#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "e2nn/dataset.hpp"
#include "e2nn/model.hpp"
#include "e2nn/posterior.hpp"

namespace e2nn {

/// One activation family of the ensemble. For Fourier slots the neuron
/// frequency is multiplier * (current scale of the member's architecture).
struct ActivationSlot {
  Activation::Kind kind = Activation::Kind::Swish;
  double multiplier = 1.0;
  bool operator==(const ActivationSlot&) const = default;
};

struct EnsembleConfig {
  std::size_t replicates_per_unique_model = 2;
  std::vector<ActivationSlot> activations = {{Activation::Kind::Swish, 1.0},
                                             {Activation::Kind::Fourier, 1.0},
                                             {Activation::Kind::Fourier, 1.1},
                                             {Activation::Kind::Fourier, 1.2}};
  std::vector<ArchitectureKind> architectures = {ArchitectureKind::Small, ArchitectureKind::Large};
  std::size_t large_first_width = 200;
  std::size_t large_second_width = 5000;
  double small_fourier_scale = std::numbers::pi;
  double large_fourier_scale = std::numbers::pi / 2.0;
  double scale_escalation_factor = 1.5;
  std::size_t max_escalations = 5;
  double weight_tolerance = 100.0;
  double nrmse_tolerance = 1e-3;
  std::size_t min_members = 4;
  double rcond = kDefaultRcond;
  std::uint64_t base_seed = 0;

  std::size_t member_count() const noexcept {
    return architectures.size() * activations.size() * replicates_per_unique_model;
  }
  /// Throws InvalidArgument on non-positive tolerances, empty families and
  /// the like.
  void validate() const;
};

enum class DropReason { WeightMagnitude, TrainingNrmse, NonFinite };

std::string_view to_string(DropReason reason) noexcept;
std::optional<DropReason> drop_reason_from_string(std::string_view s) noexcept;

struct MemberRecord {
  std::size_t index = 0;
  ArchitectureKind architecture = ArchitectureKind::Small;
  ActivationSlot slot;
  Activation activation;
  std::uint64_t seed = 0;
  TrainingStats stats;
  std::optional<DropReason> dropped;
};

/// Stability screen of one trained member: weight magnitude first, then
/// training NRMSE.
std::optional<DropReason> screen_member(const TrainingStats& stats, const EnsembleConfig& config);

struct EscalationPlan {
  bool small = false;
  bool large = false;
};

/// An architecture escalates when strictly more than half of its Fourier
/// members are dropped.
EscalationPlan plan_escalation(std::span<const MemberRecord> records);

/// A filtered set of trained emulator-embedded networks whose disagreement
/// gives the predictive uncertainty.
class Ensemble {
 public:
  /// Train every member on `data` (seed base_seed + index), drop unstable
  /// members and escalate Fourier frequencies per architecture until the
  /// escalation plan is empty or the retry cap is hit. Throws
  /// EnsembleCollapse if fewer than min_members survive.
  static Ensemble build(const Dataset& data, E2nnModel::EmulatorSet emulators,
                        const EnsembleConfig& config);

  /// Reassemble an ensemble from persisted state; `members` holds the
  /// retained models in index order.
  static Ensemble restore(EnsembleConfig config, std::vector<MemberRecord> records,
                          std::vector<E2nnModel> members, double small_scale, double large_scale,
                          std::size_t small_escalations, std::size_t large_escalations,
                          std::uint64_t dataset_fingerprint);

  const EnsembleConfig& config() const noexcept { return config_; }
  const std::vector<E2nnModel>& members() const noexcept { return members_; }
  const std::vector<MemberRecord>& records() const noexcept { return records_; }
  std::size_t dropped_count(DropReason reason) const noexcept;
  std::uint64_t dataset_fingerprint() const noexcept { return fingerprint_; }

  double small_fourier_scale() const noexcept { return small_scale_; }
  double large_fourier_scale() const noexcept { return large_scale_; }
  std::size_t small_escalations() const noexcept { return small_escalations_; }
  std::size_t large_escalations() const noexcept { return large_escalations_; }

  TPrediction posterior_predictive(std::span<const double> x_scaled) const;
  std::vector<TPrediction> posterior_predictive(const Matrix& x_scaled) const;

  /// Member predictions, one row per retained member, one column per point.
  Matrix member_predictions(const Matrix& x_scaled) const;

 private:
  Ensemble() = default;

  EnsembleConfig config_;
  std::vector<MemberRecord> records_;
  std::vector<E2nnModel> members_;
  double small_scale_ = 0.0;
  double large_scale_ = 0.0;
  std::size_t small_escalations_ = 0;
  std::size_t large_escalations_ = 0;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace e2nn
