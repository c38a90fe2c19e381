#include "ecgmm/synthetic.hpp"

#include <algorithm>
#include <random>

#include "ecgmm/error.hpp"

namespace ecgmm {

namespace {

void add_undirected(Graph& g, std::uint32_t u, std::uint32_t v) {
  g.edges.push_back({u, v});
  g.edges.push_back({v, u});
}

}  // namespace

CommunityGraph two_community_graph(const CommunityConfig& cfg, Rng& rng) {
  if (cfg.n_vertices < 2 || cfg.n_labels < 2) throw ConfigError("community graph needs >= 2 vertices and labels");
  CommunityGraph out;
  auto& g = out.graph;
  g.n_vertices = cfg.n_vertices;
  out.community.resize(cfg.n_vertices);
  for (std::size_t v = 0; v < cfg.n_vertices; ++v) out.community[v] = v < cfg.n_vertices / 2 ? 0 : 1;
  std::shuffle(out.community.begin(), out.community.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t half = cfg.n_labels / 2;
  std::vector<std::uint32_t> labels(cfg.n_vertices);
  for (std::size_t v = 0; v < cfg.n_vertices; ++v) {
    if (unit(rng) < cfg.label_noise) {
      labels[v] = std::uniform_int_distribution<std::uint32_t>(0, static_cast<std::uint32_t>(cfg.n_labels - 1))(rng);
    } else {
      const std::size_t lo = out.community[v] == 0 ? 0 : half;
      const std::size_t hi = out.community[v] == 0 ? half : cfg.n_labels;
      labels[v] = std::uniform_int_distribution<std::uint32_t>(static_cast<std::uint32_t>(lo),
                                                               static_cast<std::uint32_t>(hi - 1))(rng);
    }
  }
  g.x = Features::categorical(std::move(labels));
  for (std::uint32_t u = 0; u < cfg.n_vertices; ++u) {
    for (std::uint32_t v = u + 1; v < cfg.n_vertices; ++v) {
      const double p = out.community[u] == out.community[v] ? cfg.p_in : cfg.p_out;
      if (unit(rng) < p) add_undirected(g, u, v);
    }
  }
  return out;
}

Dataset two_community_dataset(std::size_t n_graphs, const CommunityConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.undirected = true;
  ds.vertex_meta = {FeatureKind::categorical, 1, cfg.n_labels, {}};
  for (std::size_t i = 0; i < n_graphs; ++i) ds.graphs.push_back(two_community_graph(cfg, rng).graph);
  return ds;
}

Dataset edge_signal_dataset(const EdgeSignalConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.undirected = true;
  ds.vertex_meta = {FeatureKind::categorical, 1, cfg.n_labels, {}};
  ds.edge_meta = {FeatureKind::continuous, 1, 0, {}};
  ds.target_kind = TargetKind::classification;
  ds.n_classes = 2;
  ds.class_map = {0, 1};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> label(0, static_cast<std::uint32_t>(cfg.n_labels - 1));
  for (std::size_t i = 0; i < cfg.n_graphs; ++i) {
    Graph g;
    g.n_vertices = cfg.n_vertices;
    const std::uint32_t cls = i % 2;
    std::vector<std::uint32_t> x(cfg.n_vertices);
    for (auto& l : x) l = label(rng);
    g.x = Features::categorical(std::move(x));
    std::vector<double> a;
    const double mean = cls == 0 ? cfg.mean0 : cfg.mean1;
    for (std::uint32_t u = 0; u < cfg.n_vertices; ++u) {
      for (std::uint32_t v = u + 1; v < cfg.n_vertices; ++v) {
        if (unit(rng) < cfg.edge_p) {
          add_undirected(g, u, v);
          const double f = mean + noise(rng);
          a.push_back(f);
          a.push_back(f);
        }
      }
    }
    g.a = Features::continuous(std::move(a), 1);
    g.y.label = cls;
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

Graph scaling_graph(std::size_t n_edges, std::uint64_t seed) {
  Rng rng(seed);
  Graph g;
  g.n_vertices = std::max<std::size_t>(2, n_edges / 5);
  std::uniform_int_distribution<std::uint32_t> vert(0, static_cast<std::uint32_t>(g.n_vertices - 1));
  std::uniform_int_distribution<std::uint32_t> label(0, 4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::uint32_t> x(g.n_vertices);
  for (auto& l : x) l = label(rng);
  g.x = Features::categorical(std::move(x));
  std::vector<double> a;
  a.reserve(n_edges);
  g.edges.reserve(n_edges);
  while (g.edges.size() < n_edges) {
    const auto u = vert(rng), v = vert(rng);
    if (u == v) continue;
    g.edges.push_back({u, v});
    a.push_back(noise(rng));
  }
  g.a = Features::continuous(std::move(a), 1);
  return g;
}

Dataset random_dataset(const RandomDatasetConfig& cfg, Rng& rng) {
  Dataset ds;
  if (cfg.vertex_kind == FeatureKind::categorical) {
    ds.vertex_meta = {FeatureKind::categorical, 1, cfg.domain, {}};
  } else {
    ds.vertex_meta = {FeatureKind::continuous, cfg.dim, 0, {}};
  }
  if (cfg.edge_kind == FeatureKind::categorical) {
    ds.edge_meta = {FeatureKind::categorical, 1, cfg.domain, {}};
  } else if (cfg.edge_kind == FeatureKind::continuous) {
    ds.edge_meta = {FeatureKind::continuous, cfg.dim, 0, {}};
  }
  std::uniform_int_distribution<std::uint32_t> cat(0, static_cast<std::uint32_t>(cfg.domain - 1));
  std::normal_distribution<double> noise(0.0, 1.0);
  auto features = [&](FeatureKind kind, std::size_t n) {
    if (kind == FeatureKind::categorical) {
      std::vector<std::uint32_t> ids(n);
      for (auto& i : ids) i = cat(rng);
      return Features::categorical(std::move(ids));
    }
    if (kind == FeatureKind::continuous) {
      std::vector<double> v(n * cfg.dim);
      for (auto& x : v) x = noise(rng);
      return Features::continuous(std::move(v), cfg.dim);
    }
    return Features{};
  };
  for (std::size_t i = 0; i < cfg.n_graphs; ++i) {
    Graph g;
    g.n_vertices = std::uniform_int_distribution<std::size_t>(1, cfg.max_vertices)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(0, cfg.max_edges)(rng);
    std::uniform_int_distribution<std::uint32_t> vert(0, static_cast<std::uint32_t>(g.n_vertices - 1));
    for (std::size_t e = 0; e < m && g.n_vertices > 1; ++e) {
      const auto u = vert(rng), v = vert(rng);
      if (u != v) g.edges.push_back({u, v});
    }
    g.x = features(cfg.vertex_kind, g.n_vertices);
    g.a = features(cfg.edge_kind, g.edges.size());
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

}  // namespace ecgmm
