#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ecgmm/error.hpp"
#include "ecgmm/graph_io.hpp"
#include "ecgmm/serialization.hpp"
#include "ecgmm/synthetic.hpp"
#include "helpers.hpp"

using namespace ecgmm;

namespace {

StackModel trained(const Dataset& ds, std::size_t layers) {
  StackConfig c;
  c.n_layers = layers;
  c.c_v = 3;
  c.c_e = 2;
  c.em_iterations = 4;
  c.seed = 5;
  return train_stack(ds, c).model;
}

}  // namespace

TEST_SUITE("serialization") {

TEST_CASE("model file round trip is exact") {
  const auto ds = load_tu_dataset(test_data("fixture"));
  const auto m = trained(ds, 2);
  const auto path = scratch_dir("model") / "model.json";
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back == m);
  CHECK(infer_stack(back, ds) == infer_stack(m, ds));
}

TEST_CASE("categorical vertices and edges round trip") {
  auto ds = discretize_edges(load_tu_dataset(test_data("fixture")), 3);
  const auto m = trained(ds, 1);
  CHECK(m.layers[0].edge.emission.kind() == FeatureKind::categorical);
  CHECK(model_from_json(to_json(m)) == m);
}

TEST_CASE("document header") {
  const auto j = to_json(trained(two_community_dataset(3, {}, 1), 1));
  CHECK(j.at("format") == "ecgmm-model");
  CHECK(j.at("version") == kModelFormatVersion);
  CHECK(j.at("layers").size() == 1);
  CHECK(j.at("layers")[0].at("vertex").at("transition").at("shape") == nlohmann::json{2, 3, 3});
}

TEST_CASE("malformed documents are format errors") {
  auto j = to_json(trained(two_community_dataset(3, {}, 1), 1));
  auto bad = j;
  bad["format"] = "something";
  CHECK_THROWS_AS(model_from_json(bad), FormatError);
  bad = j;
  bad["version"] = 99;
  CHECK_THROWS_AS(model_from_json(bad), FormatError);
  bad = j;
  bad["layers"][0]["vertex"]["transition"]["probs"].erase(0);
  CHECK_THROWS_AS(model_from_json(bad), FormatError);
  bad = j;
  bad["layers"].erase(0);
  CHECK_THROWS_AS(model_from_json(bad), FormatError);

  const auto path = scratch_dir("badmodel") / "m.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_model(path), FormatError);
  CHECK_THROWS_AS(load_model(path.parent_path() / "missing.json"), FormatError);
}

TEST_CASE("training log csv") {
  const auto m = trained(two_community_dataset(3, {}, 1), 2);
  std::ostringstream out;
  write_training_log_csv(m, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "layer,component,iteration,log_likelihood");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 2 * 4);
}

}
