#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "e2nn/serialization.hpp"

using namespace e2nn;
using namespace e2nn::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "e2nn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("e2nn_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

// Small networks keep the end-to-end runs quick.
const std::vector<std::string> kQuick = {"--large-first", "20", "--large-second", "200", "--candidates-per-dim",
                                         "256"};

}  // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("0..4") == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(parse_seed_list("1,3,7") == std::vector<std::uint64_t>{1, 3, 7});
  CHECK(parse_seed_list("0..2,9") == std::vector<std::uint64_t>{0, 1, 2, 9});
  CHECK_THROWS((void)parse_seed_list(""));
  CHECK_THROWS((void)parse_seed_list("4..2"));
  CHECK_THROWS((void)parse_seed_list("x"));
  CHECK_THROWS((void)parse_seed_list("1.5"));
}

TEST_CASE("run config documents") {
  const auto c = run_config_from_json(
      R"({"problem":"nonstationary2d","method":"kriging","seeds":"0..2","ei_tolerance":1e-3,
          "n_init":10,"ensemble":{"replicates_per_unique_model":3}})");
  CHECK(c.problem == "nonstationary2d");
  CHECK(c.method == "kriging");
  CHECK(c.seeds.size() == 3);
  CHECK(c.ei_tolerance == 1e-3);
  CHECK(c.n_init == 10u);
  CHECK(c.ensemble.replicates_per_unique_model == 3);
  CHECK_THROWS((void)run_config_from_json("not json"));
}

TEST_CASE("list-problems") {
  const auto r = invoke({"list-problems"});
  CHECK(r.code == kOk);
  for (const auto& name : problem_names()) CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  const auto bad_problem = invoke({"run", "--problem", "nope", "--out", fresh_dir("bad").string()});
  CHECK(bad_problem.code == kUsage);
  for (const auto& name : problem_names()) CHECK(bad_problem.err.find(name) != std::string::npos);
  CHECK(invoke({"run", "--method", "magic"}).code == kUsage);
  CHECK(invoke({"run", "--seeds", "3..1"}).code == kUsage);
  CHECK(invoke({"run", "--bogus-flag"}).code == kUsage);
  CHECK(invoke({}).code == kUsage);
  CHECK(invoke({"predict-grid"}).code == kUsage);
}

TEST_CASE("missing manifest is a runtime failure") {
  const auto r = invoke({"predict-grid", "--manifest", "/nonexistent/m.json"});
  CHECK(r.code == kRuntimeFailure);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("run writes traces, manifests and a summary") {
  const fs::path dir = fresh_dir("run");
  std::vector<std::string> args{"run", "--problem", "forrester", "--method", "ensemble", "--seeds", "0..1",
                                "--max-iterations", "1", "--out", dir.string()};
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  const auto r = invoke(args);
  REQUIRE(r.code == kOk);
  for (int s = 0; s < 2; ++s) {
    const auto base = "forrester-ensemble-seed" + std::to_string(s);
    CHECK(fs::exists(dir / (base + ".trace.jsonl")));
    CHECK(fs::exists(dir / (base + ".manifest.json")));
    const auto trace = lines(read_text_file(dir / (base + ".trace.jsonl")));
    REQUIRE(trace.size() >= 3);
    CHECK(nlohmann::json::parse(trace.front()).at("type") == "header");
    CHECK(nlohmann::json::parse(trace.back()).at("type") == "final");
  }
  const auto summary = lines(read_text_file(dir / "forrester-ensemble-summary.csv"));
  REQUIRE(summary.size() == 3);
  CHECK(summary[0] == "seed,n_hf_samples,best_y,converged");
  CHECK(summary[1].rfind("0,", 0) == 0);

  SUBCASE("identical reruns give byte-identical outputs") {
    const fs::path again = fresh_dir("run_again");
    auto args2 = args;
    args2[args2.size() - kQuick.size() - 1] = again.string();
    REQUIRE(invoke(args2).code == kOk);
    for (const char* f : {"forrester-ensemble-summary.csv", "forrester-ensemble-seed0.trace.jsonl",
                          "forrester-ensemble-seed1.manifest.json"}) {
      CHECK(read_text_file(dir / f) == read_text_file(again / f));
    }
  }
}

TEST_CASE("predict-grid tabulates the saved ensemble") {
  const fs::path dir = fresh_dir("grid");
  std::vector<std::string> args{"run", "--problem", "forrester", "--seeds", "4", "--max-iterations", "0",
                                "--out", dir.string()};
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  REQUIRE(invoke(args).code == kOk);
  const fs::path manifest = dir / "forrester-ensemble-seed4.manifest.json";
  const auto doc = nlohmann::json::parse(read_text_file(manifest));
  std::size_t retained = 0;
  for (const auto& m : doc.at("members")) retained += m.at("status") == "retained";

  const fs::path csv = dir / "grid.csv";
  const auto r = invoke({"predict-grid", "--manifest", manifest.string(), "--points", "500", "--out", csv.string()});
  REQUIRE(r.code == kOk);
  const auto rows = lines(read_text_file(csv));
  REQUIRE(rows.size() == 501);
  CHECK(rows[0] == "x1,mean,scale,dof,lo95,hi95");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto v = split_numbers(rows[i]);
    REQUIRE(v.size() == 6);
    CHECK(v[4] <= v[1]);
    CHECK(v[1] <= v[5]);
    CHECK(v[3] == static_cast<double>(retained - 1));
  }
  // x = 0 and x = 1 are training inputs and grid nodes.
  for (std::size_t i : {std::size_t{1}, std::size_t{500}}) {
    const auto v = split_numbers(rows[i]);
    CHECK(v[5] - v[4] < 1e-6);
  }

  SUBCASE("stdout output matches the file") {
    const auto s = invoke({"predict-grid", "--manifest", manifest.string(), "--points", "500"});
    CHECK(s.code == kOk);
    CHECK(s.out == read_text_file(csv));
  }
}

TEST_CASE("kriging runs share the summary format") {
  const fs::path dir = fresh_dir("kriging");
  const auto r = invoke({"run", "--problem", "nonstationary2d", "--method", "kriging", "--seeds", "0",
                         "--max-iterations", "3", "--out", dir.string()});
  REQUIRE(r.code == kOk);
  CHECK(fs::exists(dir / "nonstationary2d-kriging-seed0.trace.jsonl"));
  CHECK_FALSE(fs::exists(dir / "nonstationary2d-kriging-seed0.manifest.json"));
  const auto summary = lines(read_text_file(dir / "nonstationary2d-kriging-summary.csv"));
  CHECK(summary[0] == "seed,n_hf_samples,best_y,converged");
}

TEST_CASE("ensemble collapse exits with 1") {
  const fs::path dir = fresh_dir("collapse");
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  write_text_file(cfg, R"({"problem":"forrester","seeds":[0],"ensemble":{"weight_tolerance":1e-9,
                          "large_first_width":10,"large_second_width":20}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == kRuntimeFailure);
  CHECK(r.err.find("EnsembleCollapse") != std::string::npos);
}

TEST_CASE("output directory defaults to the environment variable") {
  const fs::path dir = fresh_dir("env");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  std::vector<std::string> args{"run", "--problem", "linear", "--seeds", "0", "--max-iterations", "0"};
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  const auto r = invoke(args);
  ::unsetenv(kOutputDirEnv);
  CHECK(r.code == kOk);
  CHECK(fs::exists(dir / "linear-ensemble-summary.csv"));
}

TEST_CASE("external problems run through shell commands") {
  const fs::path dir = fresh_dir("external");
  fs::create_directories(dir);
  const fs::path desc = dir / "problem.json";
  write_text_file(desc, R"({"name":"bowl","bounds":[[0,1]],
    "hf_command":"awk 'BEGIN{print (ARGV[1]-0.3)^2 - 1}'",
    "lf_commands":[{"name":"lf","command":"awk 'BEGIN{print (ARGV[1]-0.35)^2}'"}]})");
  std::vector<std::string> args{"run", "--problem-file", desc.string(), "--seeds", "0", "--max-iterations", "3",
                                "--out", dir.string()};
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  const auto r = invoke(args);
  REQUIRE(r.code == kOk);
  const auto summary = lines(read_text_file(dir / "bowl-ensemble-summary.csv"));
  REQUIRE(summary.size() == 2);
  const auto v = split_numbers(summary[1]);
  CHECK(v[2] < -0.99);

  const auto grid = invoke({"predict-grid", "--manifest", (dir / "bowl-ensemble-seed0.manifest.json").string(),
                            "--points", "5"});
  CHECK(grid.code == kOk);
  CHECK(lines(grid.out).size() == 6);

  SUBCASE("a failing command is a runtime failure") {
    write_text_file(desc, R"({"name":"broken","bounds":[[0,1]],"hf_command":"false"})");
    CHECK(invoke({"run", "--problem-file", desc.string(), "--out", dir.string()}).code == kRuntimeFailure);
  }
}
