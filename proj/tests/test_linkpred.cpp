#include <doctest.h>

#include <cmath>
#include <set>

#include "ecgmm/error.hpp"
#include "ecgmm/linkpred.hpp"
#include "ecgmm/synthetic.hpp"
#include "helpers.hpp"

using namespace ecgmm;

namespace {

CommunityGraph community(std::size_t n, double p_in, double p_out, std::uint64_t seed, double noise = 0.0) {
  CommunityConfig c;
  c.n_vertices = n;
  c.p_in = p_in;
  c.p_out = p_out;
  c.label_noise = noise;
  Rng rng(seed);
  return two_community_graph(c, rng);
}

LinkTrainConfig link_config(LinkMode mode) {
  LinkTrainConfig c;
  c.mode = mode;
  c.stack.n_layers = 2;
  c.stack.c_v = 6;
  c.stack.c_e = 5;
  c.stack.em_iterations = 10;
  c.mlp.learning_rate = 1e-2;
  c.mlp.max_epochs = 100;
  return c;
}

// Constant predictor: sigmoid output `p` for every input.
Predictor constant(std::size_t inputs, double p) {
  Predictor q;
  q.loss = Loss::binary_cross_entropy;
  q.n_inputs = inputs;
  q.n_outputs = 1;
  q.x_mean.assign(inputs, 0.0);
  q.x_scale.assign(inputs, 1.0);
  q.w1 = Matrix(2, inputs);
  q.w2 = Matrix(1, 2);
  q.b1 = {0.0, 0.0};
  q.b2 = {std::log(p / (1 - p))};
  return q;
}

}  // namespace

TEST_SUITE("linkpred") {

TEST_CASE("negatives match the held-out positives") {
  const auto g = community(80, 0.2, 0.02, 1).graph;
  const auto s = linkpred_prepare(g, true, 0.05, 0.1, 1.0, 3);
  for (const auto* set : {&s.val, &s.test, &s.train_pairs}) {
    std::size_t pos = 0;
    for (auto l : set->labels) pos += l;
    CHECK(pos * 2 == set->size());
  }
}

TEST_CASE("held-out positives are not training edges") {
  const auto g = community(80, 0.2, 0.02, 2).graph;
  const auto s = linkpred_prepare(g, true, 0.05, 0.1, 1.0, 4);
  std::set<std::pair<std::uint32_t, std::uint32_t>> train;
  for (const auto& e : s.train.edges) train.insert({e.src, e.dst});
  for (const auto* set : {&s.val, &s.test}) {
    for (std::size_t i = 0; i < set->size(); ++i) {
      const auto& e = set->pairs[i];
      CHECK_FALSE(train.count({e.src, e.dst}));
      CHECK_FALSE(train.count({e.dst, e.src}));
    }
  }
  CHECK(s.train.n_edges() < g.n_edges());
  CHECK_NOTHROW(s.train.validate());
}

TEST_CASE("negatives are non-edges and never reused") {
  const auto g = community(60, 0.3, 0.05, 3).graph;
  const auto s = linkpred_prepare(g, true, 0.1, 0.1, 2.0, 5);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges, seen;
  for (const auto& e : g.edges) edges.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
  for (const auto* set : {&s.val, &s.test, &s.train_pairs}) {
    for (std::size_t i = 0; i < set->size(); ++i) {
      if (set->labels[i]) continue;
      const auto& e = set->pairs[i];
      const std::pair<std::uint32_t, std::uint32_t> key{std::min(e.src, e.dst), std::max(e.src, e.dst)};
      CHECK_FALSE(edges.count(key));
      CHECK(seen.insert(key).second);
    }
  }
}

TEST_CASE("splits are deterministic per seed") {
  const auto g = community(60, 0.2, 0.02, 4).graph;
  const auto a = linkpred_prepare(g, true, 0.05, 0.1, 1.0, 6);
  const auto b = linkpred_prepare(g, true, 0.05, 0.1, 1.0, 6);
  CHECK(a.test.pairs == b.test.pairs);
  CHECK(a.val.pairs == b.val.pairs);
  CHECK(a.train == b.train);
  const auto c = linkpred_prepare(g, true, 0.05, 0.1, 1.0, 7);
  CHECK_FALSE(c.test.pairs == a.test.pairs);
}

TEST_CASE("dense graphs fail negative sampling") {
  Graph g = make_graph(5, {});
  for (std::uint32_t u = 0; u < 5; ++u) {
    for (std::uint32_t v = 0; v < 5; ++v) {
      if (u != v) g.edges.push_back({u, v});
    }
  }
  CHECK_THROWS_AS(linkpred_prepare(g, true, 0.2, 0.2, 1.0, 1), SamplingError);
  CHECK_THROWS_AS(linkpred_prepare(g, true, 0.6, 0.6, 1.0, 1), ConfigError);
}

TEST_CASE("equal layer outputs give that score") {
  const auto g = community(40, 0.3, 0.02, 5).graph;
  const auto s = linkpred_prepare(g, true, 0.1, 0.1, 1.0, 8);
  auto p = train_link_predictor(s, link_config(LinkMode::ecgmm));
  for (auto& q : p.per_layer) q = constant(q.n_inputs, 0.8);
  CHECK(linkpred_score(p, 0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(linkpred_score(p, 7, 3) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(p.score(0, 40), InputError);
}

TEST_CASE("undirected scores are symmetric") {
  const auto g = community(40, 0.3, 0.02, 6).graph;
  const auto s = linkpred_prepare(g, true, 0.1, 0.1, 1.0, 9);
  for (auto mode : {LinkMode::ecgmm, LinkMode::cgmm_baseline}) {
    const auto p = train_link_predictor(s, link_config(mode));
    for (std::uint32_t u = 0; u < 10; ++u) CHECK(p.score(u, u + 20) == p.score(u + 20, u));
  }
}

TEST_CASE("intra-cluster positives beat inter-cluster negatives") {
  const auto cg = community(200, 0.15, 0.0, 7);
  const auto s = linkpred_prepare(cg.graph, true, 0.05, 0.1, 1.0, 10);
  const auto p = train_link_predictor(s, link_config(LinkMode::ecgmm));
  std::vector<double> scores;
  std::vector<std::uint32_t> labels;
  double pos = 0.0, neg = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    const auto& e = s.test.pairs[i];
    const bool inter = cg.community[e.src] != cg.community[e.dst];
    if (s.test.labels[i] == 0 && !inter) continue;
    const double v = p.score(e.src, e.dst);
    scores.push_back(v);
    labels.push_back(s.test.labels[i]);
    (s.test.labels[i] ? pos : neg) += v;
    ++(s.test.labels[i] ? n_pos : n_neg);
  }
  REQUIRE(n_pos > 0);
  REQUIRE(n_neg > 0);
  CHECK(pos / static_cast<double>(n_pos) > neg / static_cast<double>(n_neg));
  CHECK(binary_accuracy(scores, labels) >= 0.8);
}

TEST_CASE("evaluation reports both splits") {
  const auto g = community(60, 0.2, 0.02, 8).graph;
  const auto s = linkpred_prepare(g, true, 0.1, 0.1, 1.0, 11);
  const auto p = train_link_predictor(s, link_config(LinkMode::cgmm_baseline));
  const auto r = evaluate_link_predictor(p, s);
  CHECK((r.test.accuracy >= 0.0 && r.test.accuracy <= 1.0));
  CHECK((r.val.auc >= 0.0 && r.val.auc <= 1.0));
  CHECK(p.model.config.c_e == 1);
  CHECK(link_mode_from_string("baseline") == LinkMode::cgmm_baseline);
  CHECK_THROWS_AS(link_mode_from_string("magic"), ConfigError);
}

}
