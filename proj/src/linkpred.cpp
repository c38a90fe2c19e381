#include "ecgmm/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ecgmm/embeddings.hpp"
#include "ecgmm/error.hpp"
#include "ecgmm/log.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

std::string to_string(LinkMode m) { return m == LinkMode::ecgmm ? "ecgmm" : "cgmm_baseline"; }

LinkMode link_mode_from_string(const std::string& s) {
  if (s == "ecgmm") return LinkMode::ecgmm;
  if (s == "cgmm_baseline" || s == "baseline") return LinkMode::cgmm_baseline;
  throw ConfigError("link mode must be 'ecgmm' or 'cgmm_baseline', got '" + s + "'");
}

namespace {

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v, bool undirected) {
  if (undirected && v < u) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::size_t share(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::round(frac * static_cast<double>(n)));
}

}  // namespace

LinkSplit linkpred_prepare(const Graph& g, bool undirected, double val_frac, double test_frac,
                           double neg_ratio, std::uint64_t seed) {
  g.validate();
  if (!(val_frac > 0.0 && val_frac < 1.0) || !(test_frac > 0.0 && test_frac < 1.0) ||
      val_frac + test_frac >= 1.0) {
    throw ConfigError("val_frac and test_frac must be in (0, 1) and sum below 1");
  }
  if (!(neg_ratio > 0.0)) throw ConfigError("neg_ratio must be > 0");
  if (g.n_vertices < 2) throw SamplingError("graph needs at least two vertices");

  std::unordered_set<std::uint64_t> existing;
  std::vector<Edge> positives;
  for (const auto& e : g.edges) {
    if (e.src == e.dst) continue;
    if (existing.insert(pair_key(e.src, e.dst, undirected)).second) {
      positives.push_back(undirected ? Edge{std::min(e.src, e.dst), std::max(e.src, e.dst)} : e);
    }
  }
  Rng rng(derive_seed(seed, 0x11c));
  std::shuffle(positives.begin(), positives.end(), rng);
  const std::size_t n_test = std::max<std::size_t>(1, share(test_frac, positives.size()));
  const std::size_t n_val = std::max<std::size_t>(1, share(val_frac, positives.size()));
  if (n_test + n_val >= positives.size()) throw ConfigError("too few edges to hold out positives");

  LinkSplit out;
  out.undirected = undirected;
  std::unordered_set<std::uint64_t> held;
  for (std::size_t i = 0; i < n_test + n_val; ++i) {
    const auto& e = positives[i];
    auto& dst = i < n_test ? out.test : out.val;
    dst.pairs.push_back(e);
    dst.labels.push_back(1);
    held.insert(pair_key(e.src, e.dst, undirected));
  }
  for (std::size_t i = n_test + n_val; i < positives.size(); ++i) {
    out.train_pairs.pairs.push_back(positives[i]);
    out.train_pairs.labels.push_back(1);
  }

  out.train.n_vertices = g.n_vertices;
  out.train.x = g.x;
  out.train.y = g.y;
  out.train.a.kind = g.a.kind;
  out.train.a.dim = g.a.dim;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (held.count(pair_key(edge.src, edge.dst, undirected))) continue;
    out.train.edges.push_back(edge);
    if (g.a.kind == FeatureKind::categorical) {
      out.train.a.labels.push_back(g.a.labels[e]);
    } else if (g.a.kind == FeatureKind::continuous) {
      const auto row = g.a.row(e);
      out.train.a.values.insert(out.train.a.values.end(), row.begin(), row.end());
    }
  }

  std::unordered_set<std::uint64_t> used;
  std::uniform_int_distribution<std::uint32_t> vert(0, static_cast<std::uint32_t>(g.n_vertices - 1));
  auto sample = [&](LabeledPairs& dst, std::size_t n_pos) {
    const auto need = static_cast<std::size_t>(std::round(neg_ratio * static_cast<double>(n_pos)));
    const std::size_t max_draws = 100 * need + 1000;
    std::size_t got = 0;
    for (std::size_t draws = 0; got < need; ++draws) {
      if (draws >= max_draws) {
        throw SamplingError("could not sample " + std::to_string(need) + " negative pairs after " +
                            std::to_string(max_draws) + " draws; graph too dense");
      }
      auto u = vert(rng), v = vert(rng);
      if (u == v) continue;
      const auto key = pair_key(u, v, undirected);
      if (existing.count(key) || used.count(key)) continue;
      used.insert(key);
      if (undirected && v < u) std::swap(u, v);
      dst.pairs.push_back({u, v});
      dst.labels.push_back(0);
      ++got;
    }
  };
  sample(out.test, n_test);
  sample(out.val, n_val);
  sample(out.train_pairs, out.train_pairs.size());
  return out;
}

namespace {

Dataset single_graph_dataset(Graph g, bool undirected) {
  Dataset ds;
  ds.undirected = undirected;
  if (g.x.kind == FeatureKind::categorical) {
    std::size_t k = 1;
    for (auto l : g.x.labels) k = std::max<std::size_t>(k, l + 1);
    ds.vertex_meta = {FeatureKind::categorical, 1, k, {}};
  } else if (g.x.kind == FeatureKind::continuous) {
    ds.vertex_meta = {FeatureKind::continuous, g.x.dim, 0, {}};
  }
  if (g.a.kind == FeatureKind::categorical) {
    std::size_t k = 1;
    for (auto l : g.a.labels) k = std::max<std::size_t>(k, l + 1);
    ds.edge_meta = {FeatureKind::categorical, 1, k, {}};
  } else if (g.a.kind == FeatureKind::continuous) {
    ds.edge_meta = {FeatureKind::continuous, g.a.dim, 0, {}};
  }
  g.y = {};
  ds.graphs.push_back(std::move(g));
  return ds;
}

// Training graph with sampled negatives added as edges; edge feature 1 marks
// real edges and 0 sampled non-edges.
Graph with_negative_edges(const Graph& train, const LabeledPairs& pairs, bool undirected) {
  Graph g;
  g.n_vertices = train.n_vertices;
  g.x = train.x;
  g.edges = train.edges;
  std::vector<std::uint32_t> a(train.edges.size(), 1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs.labels[i] != 0) continue;
    const auto& e = pairs.pairs[i];
    g.edges.push_back(e);
    a.push_back(0);
    if (undirected) {
      g.edges.push_back({e.dst, e.src});
      a.push_back(0);
    }
  }
  g.a = Features::categorical(std::move(a));
  return g;
}

Matrix feature_matrix(const LinkPredictor& p, const LabeledPairs& pairs, std::size_t layer, bool baseline) {
  Matrix out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& e = pairs.pairs[i];
    const auto row = baseline ? p.baseline_features(e.src, e.dst) : p.layer_features(layer, e.src, e.dst);
    if (i == 0) out = Matrix(pairs.size(), row.size());
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

std::vector<double> LinkPredictor::layer_features(std::size_t layer, std::uint32_t u, std::uint32_t v) const {
  const auto& edge = model.layers.at(layer).edge;
  if (layer == 0) {
    const std::vector<double> uniform(edge.c_v, 1.0 / static_cast<double>(edge.c_v));
    return edge_prior(edge, uniform, uniform);
  }
  const auto& q = states.vertex[layer - 1];
  return edge_prior(edge, q.row(u), q.row(v));
}

std::vector<double> LinkPredictor::baseline_features(std::uint32_t u, std::uint32_t v) const {
  std::vector<double> out;
  for (const auto& q : states.vertex) {
    for (std::size_t j = 0; j < q.cols; ++j) out.push_back(0.5 * (q(u, j) + q(v, j)));
  }
  return out;
}

double LinkPredictor::directed_score(std::uint32_t u, std::uint32_t v) const {
  if (mode == LinkMode::cgmm_baseline) {
    const auto f = baseline_features(u, v);
    Matrix x(1, f.size());
    std::copy(f.begin(), f.end(), x.data.begin());
    return pair_mlp.predict(x)(0, 0);
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    const auto f = layer_features(l, u, v);
    Matrix x(1, f.size());
    std::copy(f.begin(), f.end(), x.data.begin());
    sum += per_layer[l].predict(x)(0, 0);
  }
  return sum / static_cast<double>(per_layer.size());
}

double LinkPredictor::score(std::uint32_t u, std::uint32_t v) const {
  if (u >= n_vertices || v >= n_vertices) {
    throw InputError("vertex " + std::to_string(std::max(u, v)) + " is not in the training graph");
  }
  if (!undirected) return directed_score(u, v);
  return 0.5 * (directed_score(u, v) + directed_score(v, u));
}

std::vector<double> LinkPredictor::score(const LabeledPairs& pairs) const {
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = score(pairs.pairs[i].src, pairs.pairs[i].dst);
  return out;
}

double linkpred_score(const LinkPredictor& p, std::uint32_t u, std::uint32_t v) { return p.score(u, v); }

LinkPredictor train_link_predictor(const LinkSplit& split, const LinkTrainConfig& cfg, Execution exec) {
  LinkPredictor p;
  p.mode = cfg.mode;
  p.undirected = split.undirected;
  p.n_vertices = split.train.n_vertices;
  MLPConfig mlp = cfg.mlp;
  mlp.loss = Loss::binary_cross_entropy;

  StackConfig stack = cfg.stack;
  Graph g = split.train;
  if (cfg.mode == LinkMode::cgmm_baseline) {
    stack.c_e = 1;
    g.a = Features{};
  } else if (cfg.negative_aware) {
    g = with_negative_edges(split.train, split.train_pairs, split.undirected);
  }
  auto trained = train_stack(single_graph_dataset(std::move(g), split.undirected), stack, exec);
  p.model = std::move(trained.model);
  p.states = std::move(trained.states);

  const auto y_train = MLPTargets::binary(split.train_pairs.labels);
  const auto y_val = MLPTargets::binary(split.val.labels);
  if (cfg.mode == LinkMode::cgmm_baseline) {
    p.pair_mlp = train_mlp(feature_matrix(p, split.train_pairs, 0, true), y_train,
                           feature_matrix(p, split.val, 0, true), y_val, mlp);
  } else {
    for (std::size_t l = 0; l < p.model.layers.size(); ++l) {
      MLPConfig m = mlp;
      m.seed = derive_seed(mlp.seed, l, 0x71);
      p.per_layer.push_back(train_mlp(feature_matrix(p, split.train_pairs, l, false), y_train,
                                      feature_matrix(p, split.val, l, false), y_val, m));
    }
  }
  return p;
}

LinkEval evaluate_link_predictor(const LinkPredictor& p, const LinkSplit& split) {
  const auto val = p.score(split.val);
  const auto test = p.score(split.test);
  return {binary_metrics(val, split.val.labels), binary_metrics(test, split.test.labels)};
}

}  // namespace ecgmm
