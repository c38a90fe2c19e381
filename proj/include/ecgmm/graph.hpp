#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecgmm {

enum class FeatureKind { none, categorical, continuous };

std::string to_string(FeatureKind kind);

// Per-item features of one graph: either one categorical id per item or one
// real row of width `dim` per item.
struct Features {
  FeatureKind kind = FeatureKind::none;
  std::size_t dim = 0;                // continuous row width (1 for categorical)
  std::vector<std::uint32_t> labels;  // categorical
  std::vector<double> values;         // continuous, row-major

  static Features categorical(std::vector<std::uint32_t> ids);
  static Features continuous(std::vector<double> rows, std::size_t dim);

  std::size_t size() const;
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  bool operator==(const Features&) const = default;
};

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  bool operator==(const Edge&) const = default;
};

// Graph-level target. A class id, a real vector, or nothing.
struct Target {
  std::optional<std::int64_t> label;
  std::vector<double> values;

  bool empty() const { return !label && values.empty(); }
  bool operator==(const Target&) const = default;
};

struct Graph {
  std::size_t n_vertices = 0;
  std::vector<Edge> edges;
  Features x;  // vertex features
  Features a;  // edge features; kind none when absent
  Target y;

  std::size_t n_edges() const { return edges.size(); }
  // Throws IntegrityError / ShapeError when an invariant does not hold.
  void validate() const;
  bool operator==(const Graph&) const = default;
};

struct FeatureMeta {
  FeatureKind kind = FeatureKind::none;
  std::size_t dim = 0;     // continuous width
  std::size_t domain = 0;  // categorical domain size K
  // original label of each dense id, filled when the loader remapped labels
  std::vector<std::int64_t> label_map;
  bool operator==(const FeatureMeta&) const = default;
};

enum class TargetKind { none, classification, regression };

struct Dataset {
  std::vector<Graph> graphs;
  FeatureMeta vertex_meta;
  FeatureMeta edge_meta;
  TargetKind target_kind = TargetKind::none;
  std::size_t n_classes = 0;
  std::size_t target_dim = 0;
  std::vector<std::int64_t> class_map;
  bool undirected = false;

  std::size_t total_vertices() const;
  std::size_t total_edges() const;
  // Checks every graph and the metadata against each other.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  bool operator==(const Dataset&) const = default;
};

// Incoming-edge CSR: for vertex v, edge_ids/sources in [offsets[v], offsets[v+1]).
struct NeighborhoodIndex {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> edge_ids;
  std::vector<std::uint32_t> sources;

  std::size_t n_vertices() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const std::uint32_t> incoming_edges(std::size_t v) const {
    return {edge_ids.data() + offsets[v], degree(v)};
  }
  std::span<const std::uint32_t> neighbors(std::size_t v) const {
    return {sources.data() + offsets[v], degree(v)};
  }
};

NeighborhoodIndex build_index(const Graph& g);
NeighborhoodIndex build_index(std::size_t n_vertices, std::span<const Edge> edges);

// A whole dataset flattened into global vertex/edge numbering. The EM kernels
// operate on this; per-graph ranges map results back.
struct GraphBatch {
  std::size_t n_vertices = 0;
  std::vector<Edge> edges;  // global ids
  std::vector<std::size_t> vertex_offsets;  // size n_graphs + 1
  std::vector<std::size_t> edge_offsets;    // size n_graphs + 1
  Features x;
  Features a;  // constant 0.0 scalar when the dataset has no edge features
  bool edge_features_missing = false;
  NeighborhoodIndex index;

  static GraphBatch from(const Dataset& ds);
  static GraphBatch from(const Graph& g);

  std::size_t n_graphs() const { return vertex_offsets.size() - 1; }
  std::size_t n_edges() const { return edges.size(); }
};

// Replaces vertex features with the in-degree computed from the stored
// directed edge list (one continuous column).
Dataset with_degree_features(const Dataset& ds);

// Drops all edge features; the stack then sees a constant edge feature.
Dataset without_edge_features(const Dataset& ds);

}  // namespace ecgmm
