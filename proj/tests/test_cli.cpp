#include <doctest.h>

#include <set>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecgmm/cli.hpp"
#include "ecgmm/graph_io.hpp"
#include "ecgmm/serialization.hpp"
#include "helpers.hpp"

using namespace ecgmm;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ecgmm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), err);
  return {code, err.str()};
}

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json fixture_config(std::size_t layers) {
  return {{"task", "classify"},
          {"dataset", {{"path", test_data("fixture").string()}, {"format", "tu"}}},
          {"stack", {{"n_layers", layers}, {"c_v", 3}, {"c_e", 2}, {"em_iterations", 4}}},
          {"output_dir", "out"}};
}

std::vector<std::string> lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes a model and a training log") {
  const auto dir = scratch_dir("cli_train");
  const auto cfg = write_config(dir, fixture_config(2));
  const auto r = run({"train", "--config", cfg.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(std::filesystem::exists(dir / "out" / "model.json"));
  const auto model = load_model(dir / "out" / "model.json");
  CHECK(model.layers.size() == 2);
  std::set<std::pair<std::size_t, std::string>> traces;
  for (const auto& t : model.training_log) traces.insert({t.layer, t.component});
  CHECK(traces.size() == 4);
  CHECK(lines(dir / "out" / "training_log.csv").size() == 1 + 2 * 2 * 4);
  CHECK_FALSE(std::filesystem::exists(dir / "out" / "model.json.tmp"));
}

TEST_CASE("eval with a missing dataset names the path") {
  const auto dir = scratch_dir("cli_missing");
  auto j = fixture_config(1);
  j["dataset"]["path"] = (dir / "nowhere").string();
  const auto r = run({"eval", "--config", write_config(dir, j).string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find((dir / "nowhere").string()) != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("stats rows sum to the edge count") {
  const auto dir = scratch_dir("cli_stats");
  const auto cfg = write_config(dir, fixture_config(3));
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  const auto model = (dir / "out" / "model.json").string();
  REQUIRE(run({"stats", "--config", cfg.string(), "--model", model, "--out", (dir / "s").string()}).code == kExitOk);
  const auto rows = lines(dir / "s" / "edge_state_histogram.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "layer,state_0,state_1,total");
  for (std::size_t l = 1; l < rows.size(); ++l) {
    std::istringstream in(rows[l]);
    std::vector<std::size_t> cells;
    for (std::string c; std::getline(in, c, ',');) cells.push_back(std::stoul(c));
    CHECK(cells[1] + cells[2] == 6);
    CHECK(cells[3] == 6);
  }
}

TEST_CASE("embed writes csv and binary files") {
  const auto dir = scratch_dir("cli_embed");
  auto j = fixture_config(2);
  j["embed"] = {{"kinds", {"graph", "vertex", "edge"}}, {"binary", true}};
  const auto cfg = write_config(dir, j);
  REQUIRE(run({"train", "--config", cfg.string()}).code == kExitOk);
  const auto r = run({"embed", "--config", cfg.string(), "--model", (dir / "out" / "model.json").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(lines(dir / "out" / "embeddings_graph.csv").size() == 3);
  CHECK(lines(dir / "out" / "embeddings_vertex.csv").size() == 6);
  CHECK(lines(dir / "out" / "embeddings_edge.csv").size() == 7);
  CHECK(std::filesystem::exists(dir / "out" / "embeddings_edge.bin"));
}

TEST_CASE("eval writes a report") {
  const auto dir = scratch_dir("cli_eval");
  REQUIRE(run({"generate", "--kind", "edge_signal", "--graphs", "30", "--vertices", "10", "--out",
               (dir / "data.jsonl").string()}).code == kExitOk);
  const json j = {{"task", "classify"},
                  {"dataset", {{"path", "data.jsonl"}}},
                  {"stack", {{"n_layers", 1}, {"c_v", 3}, {"c_e", 2}, {"em_iterations", 3}}},
                  {"mlp", {{"max_epochs", 10}}},
                  {"eval", {{"folds", 3}}}};
  const auto r = run({"eval", "--config", write_config(dir, j).string(), "--seed", "3"});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(dir / "out" / "report.json");
  const auto report = json::parse(in);
  CHECK(report.at("folds").size() == 3);
  CHECK(lines(dir / "out" / "report.csv").size() == 4);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"train"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
  const auto dir = scratch_dir("cli_usage");
  auto j = fixture_config(1);
  j["bogus"] = 1;
  const auto r = run({"train", "--config", write_config(dir, j).string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("bogus") != std::string::npos);
  CHECK(run({"stats", "--config", write_config(dir, fixture_config(1)).string(), "--model",
             (dir / "none.json").string()}).code == kExitUsage);
}

TEST_CASE("runtime failures leave no partial output") {
  const auto dir = scratch_dir("cli_runtime");
  const auto cfg = write_config(dir, fixture_config(1));
  std::ofstream(dir / "broken.json") << "{}";
  const auto r = run({"stats", "--config", cfg.string(), "--model", (dir / "broken.json").string()});
  CHECK(r.code == kExitRuntime);
  CHECK_FALSE(std::filesystem::exists(dir / "out" / "edge_state_histogram.csv"));
}

}
