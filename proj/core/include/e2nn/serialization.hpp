#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "e2nn/adaptive.hpp"
#include "e2nn/ensemble.hpp"
#include "e2nn/model.hpp"

namespace e2nn {

// Persistence formats. JSON documents are passed around as strings so the
// public headers do not depend on a JSON library.

/// Config, seed, scalers and output weights of a trained model. Hidden
/// weights are not stored; they are redrawn from the seed on load.
std::string model_to_json(const E2nnModel& model);
E2nnModel model_from_json(const std::string& json, E2nnModel::EmulatorSet emulators);

std::string ensemble_config_to_json(const EnsembleConfig& config);
/// Fields missing from `json` keep their value in `base`.
EnsembleConfig ensemble_config_from_json(const std::string& json, const EnsembleConfig& base = {});

struct ManifestContext {
  /// JSON object identifying the problem, e.g. {"name":"forrester"}.
  std::string problem_json = "{}";
  const Dataset* dataset = nullptr;
};

/// Ensemble manifest: config, seeds, per-member retained/dropped status with
/// reasons, final Fourier scales, and the retained models.
std::string ensemble_manifest(const Ensemble& ensemble, const ManifestContext& context);

struct LoadedManifest {
  std::string problem_json;
  Bounds bounds;
  Ensemble ensemble;
  Dataset dataset;
};

using EmulatorResolver = std::function<E2nnModel::EmulatorSet(const std::string& problem_json)>;

LoadedManifest load_manifest(const std::filesystem::path& path, const EmulatorResolver& resolver);
LoadedManifest parse_manifest(const std::string& json, const EmulatorResolver& resolver);

/// JSONL run trace. One header line, one line per iteration, one final line.
struct TraceHeader {
  std::string method;  // "ensemble" or "kriging"
  std::string problem_json = "{}";
  std::uint64_t seed = 0;
  double ei_tolerance = 0.0;
  std::size_t max_iterations = 0;
  std::string surrogate_json = "{}";  // method-specific settings
};

std::string trace_header_line(const TraceHeader& header);
std::string trace_iteration_line(const IterationRecord& record);
std::string trace_final_line(const RunState& state);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace e2nn
