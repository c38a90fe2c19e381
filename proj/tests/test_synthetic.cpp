#include <doctest.h>

#include <set>

#include "ecgmm/synthetic.hpp"
#include "helpers.hpp"

using namespace ecgmm;

TEST_SUITE("synthetic") {

TEST_CASE("community graphs are symmetric") {
  Rng rng(1);
  const auto c = two_community_graph({}, rng);
  CHECK(c.graph.n_vertices == 30);
  CHECK(c.community.size() == 30);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& e : c.graph.edges) edges.insert({e.src, e.dst});
  for (const auto& e : c.graph.edges) CHECK(edges.count({e.dst, e.src}));
  CHECK_NOTHROW(c.graph.validate());
}

TEST_CASE("edge signal classes differ only in edge features") {
  EdgeSignalConfig cfg;
  cfg.n_graphs = 40;
  const auto ds = edge_signal_dataset(cfg, 2);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.n_classes == 2);
  double m0 = 0.0, m1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
  for (const auto& g : ds.graphs) {
    for (double v : g.a.values) (*g.y.label ? m1 : m0) += v;
    (*g.y.label ? n1 : n0) += g.a.values.size();
  }
  CHECK(m0 / static_cast<double>(n0) == doctest::Approx(0.0).epsilon(0.3));
  CHECK(m1 / static_cast<double>(n1) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("scaling graph edge count") {
  const auto g = scaling_graph(1000, 3);
  CHECK(g.n_edges() == 1000);
  CHECK(g.n_vertices == 200);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("generators are deterministic") {
  CHECK(two_community_dataset(5, {}, 7) == two_community_dataset(5, {}, 7));
  CHECK_FALSE(two_community_dataset(5, {}, 7) == two_community_dataset(5, {}, 8));
}

}
