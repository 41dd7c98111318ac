#include "e2nn/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "e2nn/error.hpp"

namespace e2nn {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

json point_json(const Point& p) { return json(p); }

std::string kind_name(Activation::Kind kind) {
  return kind == Activation::Kind::Swish ? "swish" : "fourier";
}

Activation::Kind kind_from(const std::string& s) {
  if (s == "swish") return Activation::Kind::Swish;
  if (s == "fourier") return Activation::Kind::Fourier;
  throw Error(ErrorCode::InvalidArgument, "unknown activation kind '" + s + "'");
}

ArchitectureKind arch_from(const std::string& s) {
  if (s == "small") return ArchitectureKind::Small;
  if (s == "large") return ArchitectureKind::Large;
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + s + "'");
}

json scaler_json(const Scaler& s) { return {{"mean", s.mean}, {"std", s.std}}; }
Scaler scaler_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

json model_json(const E2nnModel& m) {
  json j;
  j["architecture"] = std::string(to_string(m.config().architecture.kind));
  j["hidden_layer_sizes"] = m.config().architecture.hidden_layer_sizes;
  j["activation"] = {{"kind", kind_name(m.config().activation.kind)},
                     {"scale", m.config().activation.scale}};
  j["input_dim"] = m.config().input_dim;
  j["seed"] = m.seed();
  json names = json::array();
  if (m.emulators()) {
    for (const auto& e : *m.emulators()) names.push_back(e.name);
  }
  j["emulators"] = names;
  j["target_scaler"] = scaler_json(m.target_scaler());
  json es = json::array();
  for (const auto& s : m.emulator_scalers()) es.push_back(scaler_json(s));
  j["emulator_scalers"] = es;
  const Vector& w = m.output_weights();
  j["output_weights"] = std::vector<double>(w.data(), w.data() + w.size());
  j["output_bias"] = w(w.size() - 1);
  j["stats"] = {{"max_abs_weight", number_or_null(m.stats().max_abs_weight)},
                {"training_nrmse", number_or_null(m.stats().training_nrmse)},
                {"n_train", m.stats().n_train}};
  return j;
}

E2nnModel model_from(const json& j, E2nnModel::EmulatorSet emulators) {
  ModelConfig mc;
  mc.architecture.kind = arch_from(j.at("architecture").get<std::string>());
  mc.architecture.hidden_layer_sizes = j.at("hidden_layer_sizes").get<std::vector<std::size_t>>();
  mc.activation.kind = kind_from(j.at("activation").at("kind").get<std::string>());
  mc.activation.scale = j.at("activation").at("scale").get<double>();
  mc.input_dim = j.at("input_dim").get<std::size_t>();

  const auto names = j.at("emulators").get<std::vector<std::string>>();
  const std::size_t have = emulators ? emulators->size() : 0;
  if (names.size() != have) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(names.size()) + " emulators, resolver gave " +
                    std::to_string(have));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if ((*emulators)[i].name != names[i]) {
      throw Error(ErrorCode::InvalidArgument,
                  "emulator '" + (*emulators)[i].name + "' does not match stored '" + names[i] + "'");
    }
  }
  std::vector<Scaler> es;
  for (const auto& s : j.at("emulator_scalers")) es.push_back(scaler_from(s));
  const auto w = j.at("output_weights").get<std::vector<double>>();
  const auto& st = j.at("stats");
  TrainingStats stats{number_or_nan(st.at("max_abs_weight")), number_or_nan(st.at("training_nrmse")),
                      st.at("n_train").get<std::size_t>()};
  return E2nnModel::restore(mc, std::move(emulators), j.at("seed").get<std::uint64_t>(),
                            scaler_from(j.at("target_scaler")), std::move(es),
                            Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())),
                            stats);
}

json config_json(const EnsembleConfig& c) {
  json acts = json::array();
  for (const auto& a : c.activations) {
    acts.push_back({{"kind", kind_name(a.kind)}, {"multiplier", a.multiplier}});
  }
  json archs = json::array();
  for (auto a : c.architectures) archs.push_back(std::string(to_string(a)));
  return {{"replicates_per_unique_model", c.replicates_per_unique_model},
          {"activations", acts},
          {"architectures", archs},
          {"large_first_width", c.large_first_width},
          {"large_second_width", c.large_second_width},
          {"small_fourier_scale", c.small_fourier_scale},
          {"large_fourier_scale", c.large_fourier_scale},
          {"scale_escalation_factor", c.scale_escalation_factor},
          {"max_escalations", c.max_escalations},
          {"weight_tolerance", c.weight_tolerance},
          {"nrmse_tolerance", c.nrmse_tolerance},
          {"min_members", c.min_members},
          {"rcond", c.rcond},
          {"base_seed", c.base_seed}};
}

EnsembleConfig config_from(const json& j, EnsembleConfig c) {
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("replicates_per_unique_model", c.replicates_per_unique_model);
  take("large_first_width", c.large_first_width);
  take("large_second_width", c.large_second_width);
  take("small_fourier_scale", c.small_fourier_scale);
  take("large_fourier_scale", c.large_fourier_scale);
  take("scale_escalation_factor", c.scale_escalation_factor);
  take("max_escalations", c.max_escalations);
  take("weight_tolerance", c.weight_tolerance);
  take("nrmse_tolerance", c.nrmse_tolerance);
  take("min_members", c.min_members);
  take("rcond", c.rcond);
  take("base_seed", c.base_seed);
  if (j.contains("activations")) {
    c.activations.clear();
    for (const auto& a : j.at("activations")) {
      c.activations.push_back({kind_from(a.at("kind").get<std::string>()),
                               a.value("multiplier", 1.0)});
    }
  }
  if (j.contains("architectures")) {
    c.architectures.clear();
    for (const auto& a : j.at("architectures")) c.architectures.push_back(arch_from(a.get<std::string>()));
  }
  return c;
}

json diagnostics_json(const SurrogateDiagnostics& d) {
  return {{"members_total", d.members_total},
          {"members_retained", d.members_retained},
          {"dropped", {{"weight_magnitude", d.dropped_weight},
                       {"training_nrmse", d.dropped_nrmse},
                       {"non_finite", d.dropped_nonfinite}}},
          {"fourier_scales", {{"small", optional_number(d.small_fourier_scale)},
                              {"large", optional_number(d.large_fourier_scale)}}},
          {"escalations", {{"small", d.small_escalations}, {"large", d.large_escalations}}},
          {"retained_max_nrmse", optional_number(d.retained_max_nrmse)},
          {"retained_max_weight", optional_number(d.retained_max_weight)},
          {"theta", d.theta},
          {"nugget", optional_number(d.nugget)}};
}

json parse_object(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON in ") + what);
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, std::string("expected a JSON object in ") + what);
  return j;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

}  // namespace

std::string model_to_json(const E2nnModel& model) { return model_json(model).dump(); }

E2nnModel model_from_json(const std::string& text, E2nnModel::EmulatorSet emulators) {
  return model_from(parse_object(text, "model"), std::move(emulators));
}

std::string ensemble_config_to_json(const EnsembleConfig& config) { return config_json(config).dump(); }

EnsembleConfig ensemble_config_from_json(const std::string& text, const EnsembleConfig& base) {
  return config_from(parse_object(text, "ensemble config"), base);
}

std::string ensemble_manifest(const Ensemble& ensemble, const ManifestContext& context) {
  json j;
  j["format"] = "e2nn-ensemble-manifest";
  j["version"] = kManifestVersion;
  j["problem"] = parse_object(context.problem_json, "problem descriptor");
  j["config"] = config_json(ensemble.config());
  j["fourier_scales"] = {{"small", ensemble.small_fourier_scale()},
                         {"large", ensemble.large_fourier_scale()}};
  j["escalations"] = {{"small", ensemble.small_escalations()},
                      {"large", ensemble.large_escalations()}};
  j["dataset_fingerprint"] = hex64(ensemble.dataset_fingerprint());
  if (context.dataset) {
    const Dataset& d = *context.dataset;
    json bounds = json::array();
    for (const auto& b : d.bounds()) bounds.push_back({b.lo, b.hi});
    json xs = json::array();
    for (std::size_t i = 0; i < d.size(); ++i) xs.push_back(point_json(d.x(i)));
    j["bounds"] = bounds;
    j["dataset"] = {{"x", xs}, {"y", std::vector<double>(d.ys().begin(), d.ys().end())}};
  }

  json members = json::array();
  std::size_t next_model = 0;
  for (const auto& r : ensemble.records()) {
    json m;
    m["index"] = r.index;
    m["architecture"] = std::string(to_string(r.architecture));
    m["slot"] = {{"kind", kind_name(r.slot.kind)}, {"multiplier", r.slot.multiplier}};
    m["activation"] = {{"kind", kind_name(r.activation.kind)}, {"scale", r.activation.scale}};
    m["seed"] = r.seed;
    m["stats"] = {{"max_abs_weight", number_or_null(r.stats.max_abs_weight)},
                  {"training_nrmse", number_or_null(r.stats.training_nrmse)},
                  {"n_train", r.stats.n_train}};
    m["status"] = r.dropped ? "dropped" : "retained";
    m["drop_reason"] = r.dropped ? json(std::string(to_string(*r.dropped))) : json(nullptr);
    if (!r.dropped) m["model"] = model_json(ensemble.members()[next_model++]);
    members.push_back(std::move(m));
  }
  j["members"] = std::move(members);
  return j.dump(1);
}

LoadedManifest parse_manifest(const std::string& text, const EmulatorResolver& resolver) {
  const json j = parse_object(text, "manifest");
  if (j.value("format", "") != "e2nn-ensemble-manifest") {
    throw Error(ErrorCode::InvalidArgument, "not an ensemble manifest");
  }
  if (!j.contains("bounds") || !j.contains("dataset")) {
    throw Error(ErrorCode::InvalidArgument, "manifest lacks bounds/dataset");
  }
  Bounds bounds;
  for (const auto& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  Dataset data(bounds);
  const auto& ds = j.at("dataset");
  const auto ys = ds.at("y").get<std::vector<double>>();
  const auto xs = ds.at("x").get<std::vector<Point>>();
  if (xs.size() != ys.size()) throw Error(ErrorCode::DimensionMismatch, "manifest dataset size mismatch");
  for (std::size_t i = 0; i < xs.size(); ++i) data.add(xs[i], ys[i]);

  const std::string problem = j.at("problem").dump();
  const E2nnModel::EmulatorSet emulators = resolver(problem);
  const EnsembleConfig config = config_from(j.at("config"), EnsembleConfig{});

  std::vector<MemberRecord> records;
  std::vector<E2nnModel> models;
  for (const auto& m : j.at("members")) {
    MemberRecord r;
    r.index = m.at("index").get<std::size_t>();
    r.architecture = arch_from(m.at("architecture").get<std::string>());
    r.slot = {kind_from(m.at("slot").at("kind").get<std::string>()),
              m.at("slot").at("multiplier").get<double>()};
    r.activation = {kind_from(m.at("activation").at("kind").get<std::string>()),
                    m.at("activation").at("scale").get<double>()};
    r.seed = m.at("seed").get<std::uint64_t>();
    const auto& st = m.at("stats");
    r.stats = {number_or_nan(st.at("max_abs_weight")), number_or_nan(st.at("training_nrmse")),
               st.at("n_train").get<std::size_t>()};
    if (m.at("status").get<std::string>() == "dropped") {
      const auto reason = drop_reason_from_string(m.at("drop_reason").get<std::string>());
      if (!reason) throw Error(ErrorCode::InvalidArgument, "unknown drop reason in manifest");
      r.dropped = reason;
    } else {
      models.push_back(model_from(m.at("model"), emulators));
    }
    records.push_back(r);
  }
  Ensemble ens = Ensemble::restore(
      config, std::move(records), std::move(models), j.at("fourier_scales").at("small").get<double>(),
      j.at("fourier_scales").at("large").get<double>(), j.at("escalations").at("small").get<std::size_t>(),
      j.at("escalations").at("large").get<std::size_t>(),
      std::stoull(j.at("dataset_fingerprint").get<std::string>(), nullptr, 16));
  return LoadedManifest{problem, std::move(bounds), std::move(ens), std::move(data)};
}

LoadedManifest load_manifest(const std::filesystem::path& path, const EmulatorResolver& resolver) {
  return parse_manifest(read_text_file(path), resolver);
}

std::string trace_header_line(const TraceHeader& h) {
  json j{{"type", "header"},
         {"method", h.method},
         {"problem", parse_object(h.problem_json, "problem descriptor")},
         {"seed", h.seed},
         {"ei_tolerance", number_or_null(h.ei_tolerance)},
         {"max_iterations", h.max_iterations},
         {"surrogate", parse_object(h.surrogate_json, "surrogate settings")}};
  return j.dump();
}

std::string trace_iteration_line(const IterationRecord& r) {
  json j{{"type", "iteration"},
         {"iteration", r.iteration},
         {"n_samples", r.n_samples},
         {"x_star", r.x_star},
         {"ei_star", number_or_null(r.ei_star)},
         {"x_added", r.x_added ? json(*r.x_added) : json(nullptr)},
         {"hf", optional_number(r.hf_value)},
         {"f_min", r.f_min_after},
         {"surrogate", diagnostics_json(r.diagnostics)}};
  return j.dump();
}

std::string trace_final_line(const RunState& s) {
  const std::size_t best = s.dataset.argmin();
  json j{{"type", "final"},
         {"iterations", s.iteration},
         {"n_hf_samples", s.dataset.size()},
         {"n_initial", s.n_initial},
         {"converged", s.converged},
         {"budget_exhausted", s.budget_exhausted},
         {"best_x", s.dataset.x(best)},
         {"best_y", s.dataset.y(best)}};
  return j.dump();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace e2nn
