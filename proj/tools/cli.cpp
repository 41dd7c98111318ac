#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "e2nn/distributions.hpp"
#include "e2nn/error.hpp"
#include "e2nn/gpr.hpp"
#include "e2nn/serialization.hpp"

namespace e2nn::cli {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Runs `command x1 ... xd` through the shell and parses the first number it
// prints.
ScalarFunction command_function(std::string command) {
  return [command = std::move(command)](std::span<const double> x) {
    std::string line = command;
    for (double v : x) line += " " + format_double(v);
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(line.c_str(), "r"), pclose);
    if (!pipe) throw Error(ErrorCode::Io, "cannot run '" + line + "'");
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe.get())) output += buf;
    const int status = pclose(pipe.release());
    if (status != 0) {
      throw Error(ErrorCode::Io, "'" + line + "' exited with status " + std::to_string(status));
    }
    char* end = nullptr;
    const double value = std::strtod(output.c_str(), &end);
    if (end == output.c_str() || !std::isfinite(value)) {
      throw Error(ErrorCode::NonFinite, "'" + line + "' did not print a finite number");
    }
    return value;
  };
}

BenchmarkProblem external_problem(const json& j) {
  BenchmarkProblem p;
  p.name = j.value("name", "external");
  if (!j.contains("bounds") || !j.contains("hf_command")) {
    throw Error(ErrorCode::InvalidArgument, "problem descriptor needs 'bounds' and 'hf_command'");
  }
  for (const auto& b : j.at("bounds")) p.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  p.d = p.bounds.size();
  p.hf = command_function(j.at("hf_command").get<std::string>());
  const std::size_t gpr_samples = j.value("lf_gpr_samples", std::size_t{0});
  if (j.contains("lf_commands")) {
    for (const auto& lf : j.at("lf_commands")) {
      const std::string name = lf.value("name", "lf" + std::to_string(p.lf_list.size()));
      ScalarFunction fn = command_function(lf.at("command").get<std::string>());
      if (gpr_samples > 0) {
        p.lf_list.push_back(gpr_emulator(name, fn, p.bounds, gpr_samples, j.value("lf_gpr_seed", 0ULL)));
      } else {
        p.lf_list.push_back(emulator_from_original(name, fn, p.bounds));
      }
    }
  }
  if (j.contains("initial_design")) p.initial_design = j.at("initial_design").get<std::vector<Point>>();
  p.description = "external problem";
  return p;
}

std::string stem(const std::string& problem, const std::string& method, std::uint64_t seed) {
  return problem + "-" + method + "-seed" + std::to_string(seed);
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "e2nn-out";
}

std::vector<Point> grid_points(const Bounds& bounds, std::size_t per_dim) {
  const std::size_t d = bounds.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= per_dim;
  std::vector<Point> pts;
  pts.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    Point x(d);
    std::size_t rem = k;
    // First coordinate varies slowest.
    for (std::size_t j = d; j-- > 0;) {
      const std::size_t idx = rem % per_dim;
      rem /= per_dim;
      const double t = per_dim == 1 ? 0.5 : static_cast<double>(idx) / static_cast<double>(per_dim - 1);
      x[j] = bounds[j].lo + t * (bounds[j].hi - bounds[j].lo);
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorCode::InvalidArgument, "bad seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    if (const auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = number(part.substr(0, dots));
      const auto hi = number(part.substr(dots + 2));
      if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty seed range '" + part + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(number(part));
    }
  }
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  return seeds;
}

RunConfig run_config_from_json(const std::string& text, RunConfig base) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "malformed run config");
  if (j.contains("problem")) {
    base.problem = j.at("problem").is_string() ? j.at("problem").get<std::string>() : j.at("problem").dump();
  }
  if (j.contains("method")) base.method = j.at("method").get<std::string>();
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    base.seeds = s.is_string() ? parse_seed_list(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
  }
  if (j.contains("ei_tolerance")) base.ei_tolerance = j.at("ei_tolerance").get<double>();
  if (j.contains("n_init")) base.n_init = j.at("n_init").get<std::size_t>();
  if (j.contains("max_iterations")) base.max_iterations = j.at("max_iterations").get<std::size_t>();
  if (j.contains("initial_design")) base.initial_design = j.at("initial_design").get<std::vector<Point>>();
  if (j.contains("output_dir")) base.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("ensemble")) base.ensemble = ensemble_config_from_json(j.at("ensemble").dump(), base.ensemble);
  if (j.contains("search")) {
    const auto& s = j.at("search");
    base.search.candidates_per_dim = s.value("candidates_per_dim", base.search.candidates_per_dim);
    base.search.polish_starts = s.value("polish_starts", base.search.polish_starts);
    base.search.polish_evals = s.value("polish_evals", base.search.polish_evals);
    base.search.duplicate_guard = s.value("duplicate_guard", base.search.duplicate_guard);
  }
  return base;
}

ResolvedProblem resolve_problem(const std::string& name_or_descriptor) {
  const auto first = name_or_descriptor.find_first_not_of(" \t\n");
  if (first != std::string::npos && name_or_descriptor[first] == '{') {
    const json j = json::parse(name_or_descriptor, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, "malformed problem descriptor");
    if (!j.contains("hf_command")) return resolve_problem(j.value("name", ""));
    return {external_problem(j), j.dump()};
  }
  BenchmarkProblem p = problem_by_name(name_or_descriptor);
  const std::string descriptor = json{{"name", p.name}}.dump();
  return {std::move(p), descriptor};
}

std::vector<RunSummaryRow> cmd_run(const RunConfig& config, std::ostream& log) {
  if (config.method != "ensemble" && config.method != "kriging") {
    throw Error(ErrorCode::InvalidArgument,
                "unknown method '" + config.method + "'; expected ensemble or kriging");
  }
  if (config.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  config.ensemble.validate();
  const ResolvedProblem resolved = resolve_problem(config.problem);
  const BenchmarkProblem& problem = resolved.problem;

  const std::filesystem::path out_dir =
      config.output_dir.empty() ? default_output_dir() : config.output_dir;
  std::filesystem::create_directories(out_dir);

  LoopSettings loop;
  loop.initial_design = config.initial_design.empty() ? problem.initial_design : config.initial_design;
  if (config.n_init && config.initial_design.empty()) loop.initial_design.clear();
  loop.n_init = config.n_init;
  loop.ei_tolerance = config.ei_tolerance.value_or(loop.ei_tolerance);
  loop.max_iterations = config.max_iterations;
  loop.search = config.search;

  std::vector<RunSummaryRow> rows;
  for (std::uint64_t seed : config.seeds) {
    loop.seed = seed;
    const std::string base = stem(problem.name, config.method, seed);
    std::ostringstream trace;
    TraceHeader header;
    header.method = config.method;
    header.problem_json = resolved.descriptor_json;
    header.seed = seed;
    header.ei_tolerance = loop.ei_tolerance;
    header.max_iterations = loop.max_iterations.value_or(default_max_iterations(problem.d));
    if (config.method == "ensemble") {
      header.surrogate_json = ensemble_config_to_json(config.ensemble);
    } else {
      header.surrogate_json =
          json{{"kernel", "squared-exponential"}, {"trend", "constant"}}.dump();
    }
    trace << trace_header_line(header) << '\n';
    auto observer = [&trace](const RunState&, const IterationRecord& rec) {
      trace << trace_iteration_line(rec) << '\n';
    };

    std::optional<RunState> state;
    std::string manifest;
    if (config.method == "ensemble") {
      AdaptiveSettings settings;
      static_cast<LoopSettings&>(settings) = loop;
      settings.ensemble = config.ensemble;
      const AdaptiveProblem ap{problem.hf, problem.emulator_set(), problem.bounds};
      // The last build sees the final dataset: the loop stops right after it.
      std::optional<Ensemble> last_ensemble;
      state = run_adaptive(ap, settings, observer,
                           [&last_ensemble](const Ensemble& ens) { last_ensemble = ens; });
      manifest = ensemble_manifest(*last_ensemble, {resolved.descriptor_json, &state->dataset});
    } else {
      EgoSettings settings;
      static_cast<LoopSettings&>(settings) = loop;
      state = run_ego({problem.hf, problem.bounds}, settings, observer);
    }
    trace << trace_final_line(*state) << '\n';
    write_text_file(out_dir / (base + ".trace.jsonl"), trace.str());
    if (!manifest.empty()) write_text_file(out_dir / (base + ".manifest.json"), manifest);

    const std::size_t best = state->dataset.argmin();
    rows.push_back({seed, state->dataset.size(), state->dataset.y(best), state->converged});
    log << base << ": " << state->dataset.size() << " HF samples, best y " << format_double(rows.back().best_y)
        << (state->converged ? ", converged" : ", budget exhausted") << '\n';
  }

  std::ostringstream csv;
  csv << "seed,n_hf_samples,best_y,converged\n";
  for (const auto& r : rows) {
    csv << r.seed << ',' << r.n_hf_samples << ',' << format_double(r.best_y) << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  write_text_file(out_dir / (problem.name + "-" + config.method + "-summary.csv"), csv.str());
  return rows;
}

void cmd_predict_grid(const std::filesystem::path& manifest_path, const GridSpec& grid,
                      std::ostream& csv) {
  if (grid.points_per_dim < 1) throw Error(ErrorCode::InvalidArgument, "grid needs >= 1 point per dim");
  if (!std::filesystem::exists(manifest_path)) {
    throw Error(ErrorCode::Io, "manifest " + manifest_path.string() + " does not exist");
  }
  const LoadedManifest loaded = load_manifest(manifest_path, [](const std::string& problem_json) {
    return resolve_problem(problem_json).problem.emulator_set();
  });
  const Bounds& bounds = loaded.bounds;
  const std::vector<Point> pts = grid_points(bounds, grid.points_per_dim);

  Matrix scaled(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(bounds.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point z = to_scaled(pts[i], bounds);
    for (std::size_t j = 0; j < z.size(); ++j) {
      scaled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j];
    }
  }
  const auto preds = loaded.ensemble.posterior_predictive(scaled);
  const double q = t_quantile(0.975, preds.front().dof);

  for (std::size_t j = 0; j < bounds.size(); ++j) csv << 'x' << (j + 1) << ',';
  csv << "mean,scale,dof,lo95,hi95\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (double v : pts[i]) csv << format_double(v) << ',';
    const TPrediction& p = preds[i];
    csv << format_double(p.mean) << ',' << format_double(p.scale) << ',' << p.dof << ','
        << format_double(p.mean - q * p.scale) << ',' << format_double(p.mean + q * p.scale) << '\n';
  }
}

void cmd_list_problems(std::ostream& out) {
  for (const auto& name : problem_names()) {
    const BenchmarkProblem p = problem_by_name(name);
    out << name << "\t" << p.d << "-D\t" << p.description << '\n';
  }
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity ensemble surrogates with Expected-Improvement adaptive sampling"};
  app.require_subcommand(1);

  RunConfig config;
  std::string seeds_text;
  std::string config_file;
  std::string problem_file;
  std::optional<std::string> problem_name;
  std::optional<std::string> method;
  std::optional<double> ei_tolerance;
  std::optional<std::size_t> n_init;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> large_first;
  std::optional<std::size_t> large_second;
  std::optional<double> small_scale;
  std::optional<double> large_scale;
  std::optional<std::size_t> candidates;
  std::string output_dir;

  auto* run = app.add_subcommand("run", "Run adaptive optimization for one or more seeds");
  run->add_option("--config", config_file, "JSON run config; flags override its fields");
  run->add_option("--problem", problem_name, "Built-in problem name (see list-problems)");
  run->add_option("--problem-file", problem_file, "JSON descriptor of an external problem");
  run->add_option("--method", method, "ensemble | kriging");
  run->add_option("--seeds", seeds_text, "Seeds, e.g. 0..4 or 1,2,5");
  run->add_option("--ei-tolerance", ei_tolerance, "Relative EI stopping tolerance");
  run->add_option("--n-init", n_init, "Initial LHS size (overrides the problem's default design)");
  run->add_option("--max-iterations", max_iterations, "Cap on adaptive samples");
  run->add_option("--replicates", replicates, "Replicates per unique ensemble model");
  run->add_option("--large-first", large_first, "Width of the large network's first layer");
  run->add_option("--large-second", large_second, "Width of the large network's second layer");
  run->add_option("--small-scale", small_scale, "Initial Fourier scale of small networks");
  run->add_option("--large-scale", large_scale, "Initial Fourier scale of large networks");
  run->add_option("--candidates-per-dim", candidates, "Acquisition candidates per dimension");
  run->add_option("--out", output_dir, std::string("Output directory (default $") + kOutputDirEnv + ")");

  std::string manifest;
  std::string grid_out;
  GridSpec grid;
  auto* predict = app.add_subcommand("predict-grid", "Tabulate a saved ensemble on a grid");
  predict->add_option("--manifest", manifest, "Ensemble manifest JSON")->required();
  predict->add_option("--points", grid.points_per_dim, "Grid points per dimension");
  predict->add_option("--out", grid_out, "CSV output file (default stdout)");

  auto* list = app.add_subcommand("list-problems", "List built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (list->parsed()) {
      cmd_list_problems(out);
      return kOk;
    }
    if (predict->parsed()) {
      if (grid_out.empty()) {
        cmd_predict_grid(manifest, grid, out);
      } else {
        std::ostringstream csv;
        cmd_predict_grid(manifest, grid, csv);
        write_text_file(grid_out, csv.str());
      }
      return kOk;
    }

    // run
    try {
      if (!config_file.empty()) config = run_config_from_json(read_text_file(config_file), config);
      if (problem_name) config.problem = *problem_name;
      if (!problem_file.empty()) config.problem = read_text_file(problem_file);
      if (method) config.method = *method;
      if (!seeds_text.empty()) config.seeds = parse_seed_list(seeds_text);
      if (ei_tolerance) config.ei_tolerance = ei_tolerance;
      if (n_init) config.n_init = n_init;
      if (max_iterations) config.max_iterations = max_iterations;
      if (replicates) config.ensemble.replicates_per_unique_model = *replicates;
      if (large_first) config.ensemble.large_first_width = *large_first;
      if (large_second) config.ensemble.large_second_width = *large_second;
      if (small_scale) config.ensemble.small_fourier_scale = *small_scale;
      if (large_scale) config.ensemble.large_fourier_scale = *large_scale;
      if (candidates) config.search.candidates_per_dim = *candidates;
      if (!output_dir.empty()) config.output_dir = output_dir;
      if (config.method != "ensemble" && config.method != "kriging") {
        throw Error(ErrorCode::InvalidArgument,
                    "unknown method '" + config.method + "'; expected ensemble or kriging");
      }
      config.ensemble.validate();
      (void)resolve_problem(config.problem);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
    cmd_run(config, err);
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kUsage : kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace e2nn::cli
