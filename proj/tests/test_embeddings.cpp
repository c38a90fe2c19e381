#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ecgmm/embeddings.hpp"
#include "ecgmm/error.hpp"
#include "ecgmm/synthetic.hpp"
#include "helpers.hpp"
#include "random_states.hpp"

using namespace ecgmm;

namespace {

StackConfig config(std::size_t layers, std::size_t cv, std::size_t ce, StateMode mode = StateMode::continuous) {
  StackConfig c;
  c.n_layers = layers;
  c.c_v = cv;
  c.c_e = ce;
  c.em_iterations = 5;
  c.state_mode = mode;
  c.seed = 3;
  return c;
}

// Relabels vertices by `perm` and reverses the edge order.
Graph permuted(const Graph& g, const std::vector<std::uint32_t>& perm) {
  Graph h;
  h.n_vertices = g.n_vertices;
  std::vector<std::uint32_t> labels(g.n_vertices);
  for (std::size_t v = 0; v < g.n_vertices; ++v) labels[perm[v]] = g.x.labels[v];
  h.x = Features::categorical(labels);
  std::vector<double> a;
  for (std::size_t e = g.edges.size(); e-- > 0;) {
    h.edges.push_back({perm[g.edges[e].src], perm[g.edges[e].dst]});
    if (g.a.kind == FeatureKind::continuous) a.push_back(g.a.values[e]);
  }
  if (g.a.kind == FeatureKind::continuous) h.a = Features::continuous(a, 1);
  h.y = g.y;
  return h;
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("bigram of one-hot neighbours") {
  const auto idx = build_index(3, std::vector<Edge>{{1, 0}, {2, 0}});
  Matrix q(3, 3);
  q(0, 1) = 1.0;
  q(1, 2) = 1.0;
  q(2, 2) = 1.0;
  const auto b = vertex_bigram(idx, q);
  for (std::size_t k = 0; k < 9; ++k) CHECK(b(0, k) == (k == 1 * 3 + 2 ? 2.0 : 0.0));
  for (std::size_t k = 0; k < 9; ++k) CHECK(b(1, k) == 0.0);
}

TEST_CASE("bigram mass equals the in-degree") {
  Rng rng(1);
  const auto g = two_community_graph({}, rng).graph;
  const auto idx = build_index(g);
  const auto q = random_posteriors(rng, g.n_vertices, 5);
  const auto b = vertex_bigram(idx, q);
  for (std::size_t u = 0; u < g.n_vertices; ++u) {
    const auto row = b.row(u);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) ==
          doctest::Approx(static_cast<double>(idx.degree(u))).epsilon(1e-9));
  }
}

TEST_CASE("embedding dimensions") {
  EmbeddingConfig c;
  CHECK(graph_embedding_dim(c, 3, 20, 5) == 75);
  c.representation = Representation::unibigram;
  CHECK(graph_embedding_dim(c, 1, 4, 2) == 4 + 16 + 2);
  c.include_edge_unigrams = false;
  CHECK(graph_embedding_dim(c, 2, 3, 9) == 2 * 12);

  const auto ds = two_community_dataset(4, {}, 2);
  const auto fs = train_stack(ds, config(2, 3, 5)).states;
  const auto e = edge_embedding(fs);
  CHECK(e.rows == ds.total_edges());
  CHECK(e.cols == 10);
}

TEST_CASE("identical vertex posteriors give that posterior") {
  const auto ds = two_community_dataset(2, {}, 3);
  const auto b = GraphBatch::from(ds);
  FrozenStates fs;
  Matrix v(b.n_vertices, 3), e(b.n_edges(), 2, 0.5);
  for (std::size_t u = 0; u < b.n_vertices; ++u) {
    v(u, 0) = 0.2;
    v(u, 1) = 0.3;
    v(u, 2) = 0.5;
  }
  fs.vertex = {v};
  fs.edge = {e};
  const auto g = graph_embedding(fs, {}, b);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(g(r, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(g(r, 1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(g(r, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g(r, 3) == doctest::Approx(0.5).epsilon(1e-12));
  }
  EmbeddingConfig sum;
  sum.readout = Readout::sum;
  const auto s = graph_embedding(fs, sum, b);
  CHECK(s(0, 0) == doctest::Approx(0.2 * static_cast<double>(b.vertex_offsets[1])));
}

TEST_CASE("permutation invariance of graph embeddings") {
  EdgeSignalConfig ec;
  ec.n_graphs = 6;
  const auto ds = edge_signal_dataset(ec, 4);
  const auto model = train_stack(ds, config(3, 4, 3)).model;
  Dataset shuffled = ds;
  Rng rng(5);
  for (auto& g : shuffled.graphs) {
    std::vector<std::uint32_t> perm(g.n_vertices);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    g = permuted(g, perm);
  }
  for (auto rep : {Representation::unigram, Representation::unibigram}) {
    for (auto ro : {Readout::mean, Readout::sum}) {
      EmbeddingConfig c{rep, ro, true};
      const auto a = graph_embedding(infer_stack(model, ds), c, ds);
      const auto b = graph_embedding(infer_stack(model, shuffled), c, shuffled);
      CHECK(max_abs_diff(a, b) < 1e-12);
    }
  }
}

TEST_CASE("discrete states give one-hot blocks") {
  const auto ds = two_community_dataset(3, {}, 6);
  const auto fs = train_stack(ds, config(2, 4, 3, StateMode::discrete)).states;
  const auto b = GraphBatch::from(ds);
  const auto v = vertex_embedding(fs, {}, b);
  for (std::size_t u = 0; u < v.rows; ++u) {
    for (std::size_t l = 0; l < 2; ++l) {
      const auto row = v.row(u).subspan(l * 4, 4);
      CHECK(std::count(row.begin(), row.end(), 1.0) == 1);
      CHECK(std::count(row.begin(), row.end(), 0.0) == 3);
    }
  }
}

TEST_CASE("continuous blocks lie on the simplex") {
  const auto ds = two_community_dataset(3, {}, 7);
  const auto fs = train_stack(ds, config(3, 4, 3)).states;
  for (const auto* set : {&fs.vertex, &fs.edge}) {
    for (const auto& m : *set) {
      for (std::size_t r = 0; r < m.rows; ++r) {
        const auto row = m.row(r);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("empty graph embeds as zeros") {
  Dataset ds = two_community_dataset(1, {}, 8);
  Graph empty;
  empty.x = Features::categorical({});
  ds.graphs.push_back(empty);
  const auto model = train_stack(two_community_dataset(3, {}, 8), config(1, 3, 2)).model;
  const auto g = graph_embedding(infer_stack(model, ds), {}, ds);
  for (double v : g.row(1)) CHECK(v == 0.0);
}

TEST_CASE("csv layout") {
  const auto ds = two_community_dataset(2, {}, 9);
  const auto b = GraphBatch::from(ds);
  const auto fs = train_stack(ds, config(1, 2, 2)).states;
  std::ostringstream out;
  write_embedding_csv(vertex_embedding(fs, {}, b), EmbeddingKind::vertex, b, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "graph,vertex,f0,f1");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == b.n_vertices);
  CHECK(last.rfind("1," + std::to_string(ds.graphs[1].n_vertices - 1) + ",", 0) == 0);
  std::ostringstream wrong;
  CHECK_THROWS_AS(write_embedding_csv(edge_embedding(fs), EmbeddingKind::vertex, b, wrong), ShapeError);
}

TEST_CASE("binary round trip") {
  Rng rng(10);
  const auto m = random_posteriors(rng, 7, 5);
  std::stringstream ss;
  write_embedding_binary(m, EmbeddingKind::edge, ss);
  const auto bytes = ss.str();
  CHECK(bytes.substr(0, 8) == "ECGMMEMB");
  const auto back = read_embedding_binary(ss);
  CHECK(back.matrix == m);
  CHECK(back.kind == EmbeddingKind::edge);

  std::istringstream junk("NOTMAGIC........");
  CHECK_THROWS_AS(read_embedding_binary(junk), FormatError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_embedding_binary(truncated), FormatError);
}

TEST_CASE("option parsing") {
  CHECK(representation_from_string("unibigram") == Representation::unibigram);
  CHECK(readout_from_string("sum") == Readout::sum);
  CHECK(embedding_kind_from_string("edge") == EmbeddingKind::edge);
  CHECK_THROWS_AS(readout_from_string("max"), ConfigError);
}

}
