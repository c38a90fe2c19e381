#include "ecgmm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "ecgmm/error.hpp"

namespace ecgmm {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::none: return "none";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::continuous: return "continuous";
  }
  return "unknown";
}

Features Features::categorical(std::vector<std::uint32_t> ids) {
  Features f;
  f.kind = FeatureKind::categorical;
  f.dim = 1;
  f.labels = std::move(ids);
  return f;
}

Features Features::continuous(std::vector<double> rows, std::size_t dim) {
  if (dim == 0 || rows.size() % dim != 0) {
    throw ShapeError("continuous features: " + std::to_string(rows.size()) +
                     " values do not split into rows of width " + std::to_string(dim));
  }
  Features f;
  f.kind = FeatureKind::continuous;
  f.dim = dim;
  f.values = std::move(rows);
  return f;
}

std::size_t Features::size() const {
  switch (kind) {
    case FeatureKind::none: return 0;
    case FeatureKind::categorical: return labels.size();
    case FeatureKind::continuous: return dim == 0 ? 0 : values.size() / dim;
  }
  return 0;
}

void Graph::validate() const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].src >= n_vertices || edges[e].dst >= n_vertices) {
      throw IntegrityError("edge " + std::to_string(e) + " (" + std::to_string(edges[e].src) +
                           "," + std::to_string(edges[e].dst) + ") references a vertex outside [0," +
                           std::to_string(n_vertices) + ")");
    }
  }
  if (x.kind != FeatureKind::none && x.size() != n_vertices) {
    throw ShapeError("vertex features: expected " + std::to_string(n_vertices) + " rows, got " +
                     std::to_string(x.size()));
  }
  if (a.kind != FeatureKind::none && a.size() != edges.size()) {
    throw ShapeError("edge features: expected " + std::to_string(edges.size()) + " rows, got " +
                     std::to_string(a.size()));
  }
}

std::size_t Dataset::total_vertices() const {
  std::size_t n = 0;
  for (const auto& g : graphs) n += g.n_vertices;
  return n;
}

std::size_t Dataset::total_edges() const {
  std::size_t m = 0;
  for (const auto& g : graphs) m += g.edges.size();
  return m;
}

namespace {

void check_features(const Features& f, const FeatureMeta& meta, std::size_t graph,
                    const char* what) {
  auto where = [&] { return std::string(what) + " of graph " + std::to_string(graph); };
  if (f.kind != meta.kind) {
    throw ValueError(where() + ": kind " + to_string(f.kind) + " differs from dataset kind " +
                     to_string(meta.kind));
  }
  if (f.kind == FeatureKind::categorical) {
    for (auto id : f.labels) {
      if (id >= meta.domain) {
        throw ValueError(where() + ": label " + std::to_string(id) + " outside domain " +
                         std::to_string(meta.domain));
      }
    }
  } else if (f.kind == FeatureKind::continuous) {
    if (f.dim != meta.dim) {
      throw ShapeError(where() + ": width " + std::to_string(f.dim) + " differs from " +
                       std::to_string(meta.dim));
    }
    for (double v : f.values) {
      if (!std::isfinite(v)) throw ValueError(where() + ": non-finite value");
    }
  }
}

}  // namespace

void Dataset::validate() const {
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    g.validate();
    check_features(g.x, vertex_meta, gi, "vertex features");
    check_features(g.a, edge_meta, gi, "edge features");
    switch (target_kind) {
      case TargetKind::none: break;
      case TargetKind::classification:
        if (!g.y.label || *g.y.label < 0 ||
            static_cast<std::size_t>(*g.y.label) >= n_classes) {
          throw ValueError("graph " + std::to_string(gi) + ": missing or out-of-range class label");
        }
        break;
      case TargetKind::regression:
        if (g.y.values.size() != target_dim) {
          throw ShapeError("graph " + std::to_string(gi) + ": target width " +
                           std::to_string(g.y.values.size()) + " differs from " +
                           std::to_string(target_dim));
        }
        break;
    }
    if (undirected) {
      std::set<std::pair<std::uint32_t, std::uint32_t>> present;
      for (const auto& e : g.edges) present.emplace(e.src, e.dst);
      for (const auto& e : g.edges) {
        if (!present.contains({e.dst, e.src})) {
          throw IntegrityError("graph " + std::to_string(gi) + " is flagged undirected but edge (" +
                               std::to_string(e.src) + "," + std::to_string(e.dst) +
                               ") has no reverse");
        }
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out = *this;
  out.graphs.clear();
  out.graphs.reserve(indices.size());
  for (auto i : indices) {
    if (i >= graphs.size()) throw InputError("subset index " + std::to_string(i) + " out of range");
    out.graphs.push_back(graphs[i]);
  }
  return out;
}

NeighborhoodIndex build_index(std::size_t n_vertices, std::span<const Edge> edges) {
  NeighborhoodIndex idx;
  idx.offsets.assign(n_vertices + 1, 0);
  for (const auto& e : edges) {
    if (e.dst >= n_vertices || e.src >= n_vertices) {
      throw IntegrityError("edge endpoint outside vertex range");
    }
    ++idx.offsets[e.dst + 1];
  }
  for (std::size_t v = 0; v < n_vertices; ++v) idx.offsets[v + 1] += idx.offsets[v];
  idx.edge_ids.resize(edges.size());
  idx.sources.resize(edges.size());
  std::vector<std::size_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto slot = cursor[edges[e].dst]++;
    idx.edge_ids[slot] = static_cast<std::uint32_t>(e);
    idx.sources[slot] = edges[e].src;
  }
  return idx;
}

NeighborhoodIndex build_index(const Graph& g) {
  g.validate();
  return build_index(g.n_vertices, g.edges);
}

namespace {

void append_features(Features& dst, const Features& src) {
  if (dst.kind == FeatureKind::none) {
    dst.kind = src.kind;
    dst.dim = src.dim;
  }
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
}

}  // namespace

GraphBatch GraphBatch::from(const Dataset& ds) {
  GraphBatch b;
  b.vertex_offsets.reserve(ds.graphs.size() + 1);
  b.edge_offsets.reserve(ds.graphs.size() + 1);
  b.vertex_offsets.push_back(0);
  b.edge_offsets.push_back(0);
  b.edges.reserve(ds.total_edges());
  b.edge_features_missing = ds.edge_meta.kind == FeatureKind::none;
  for (const auto& g : ds.graphs) {
    g.validate();
    const auto base = static_cast<std::uint32_t>(b.n_vertices);
    for (const auto& e : g.edges) b.edges.push_back({e.src + base, e.dst + base});
    if (g.x.kind == FeatureKind::none) {
      // featureless vertices: one constant category
      append_features(b.x, Features::categorical(std::vector<std::uint32_t>(g.n_vertices, 0)));
    } else {
      append_features(b.x, g.x);
    }
    if (!b.edge_features_missing) append_features(b.a, g.a);
    b.n_vertices += g.n_vertices;
    b.vertex_offsets.push_back(b.n_vertices);
    b.edge_offsets.push_back(b.edges.size());
  }
  if (b.x.kind == FeatureKind::none) b.x = Features::categorical({});
  if (b.edge_features_missing) {
    b.a = Features::continuous(std::vector<double>(b.edges.size(), 0.0), 1);
  } else if (b.a.kind == FeatureKind::none) {
    b.a = ds.edge_meta.kind == FeatureKind::categorical
              ? Features::categorical({})
              : Features::continuous({}, std::max<std::size_t>(ds.edge_meta.dim, 1));
  }
  b.index = build_index(b.n_vertices, b.edges);
  return b;
}

GraphBatch GraphBatch::from(const Graph& g) {
  Dataset ds;
  ds.graphs.push_back(g);
  ds.vertex_meta.kind = g.x.kind;
  ds.edge_meta.kind = g.a.kind;
  return from(ds);
}

Dataset with_degree_features(const Dataset& ds) {
  Dataset out = ds;
  out.vertex_meta = FeatureMeta{FeatureKind::continuous, 1, 0, {}};
  for (auto& g : out.graphs) {
    std::vector<double> deg(g.n_vertices, 0.0);
    for (const auto& e : g.edges) deg[e.dst] += 1.0;
    g.x = Features::continuous(std::move(deg), 1);
  }
  return out;
}

Dataset without_edge_features(const Dataset& ds) {
  Dataset out = ds;
  out.edge_meta = FeatureMeta{};
  for (auto& g : out.graphs) g.a = Features{};
  return out;
}

}  // namespace ecgmm
