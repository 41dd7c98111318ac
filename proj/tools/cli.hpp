#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "e2nn/adaptive.hpp"
#include "e2nn/ensemble.hpp"
#include "e2nn/problems.hpp"

namespace e2nn::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsage = 2 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "E2NN_OUTPUT_DIR";

struct RunConfig {
  /// Either a built-in problem name or a JSON descriptor of an external
  /// problem (see resolve_problem).
  std::string problem = "forrester";
  std::string method = "ensemble";
  std::vector<std::uint64_t> seeds = {0};
  std::optional<double> ei_tolerance;
  std::optional<std::size_t> n_init;
  std::optional<std::size_t> max_iterations;
  std::vector<Point> initial_design;
  EnsembleConfig ensemble;
  AcquisitionSearch search;
  std::filesystem::path output_dir;
};

/// Parses "0..4", "1,3,7" or a mix such as "0..2,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Overlay a JSON run-config document onto `base`.
RunConfig run_config_from_json(const std::string& json, RunConfig base = {});

/// A problem plus the JSON object that identifies it in traces and manifests.
struct ResolvedProblem {
  BenchmarkProblem problem;
  std::string descriptor_json;
};

/// Resolve a problem name, or a JSON descriptor of the form
///   {"name": "...", "bounds": [[lo, hi], ...], "hf_command": "...",
///    "lf_commands": [{"name": "...", "command": "..."}], "lf_gpr_samples": 0}
/// where each command is run as `command x1 ... xd` and prints one number.
ResolvedProblem resolve_problem(const std::string& name_or_descriptor);

struct RunSummaryRow {
  std::uint64_t seed = 0;
  std::size_t n_hf_samples = 0;
  double best_y = 0.0;
  bool converged = false;
};

/// Execute one run per seed and write traces, manifests and the summary CSV.
std::vector<RunSummaryRow> cmd_run(const RunConfig& config, std::ostream& log);

struct GridSpec {
  std::size_t points_per_dim = 100;
};

/// Write the mean, scale, dof and 95% t-band of a saved ensemble on a
/// regular grid over the problem bounds.
void cmd_predict_grid(const std::filesystem::path& manifest, const GridSpec& grid,
                      std::ostream& csv);

void cmd_list_problems(std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace e2nn::cli
