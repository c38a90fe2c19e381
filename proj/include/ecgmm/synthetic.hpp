#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecgmm/graph.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

// Two planted communities of equal size. Vertex labels are drawn from the
// community's half of the label range, replaced by a uniform label with
// probability `label_noise`. Undirected, both directions stored.
struct CommunityConfig {
  std::size_t n_vertices = 30;
  double p_in = 0.3;
  double p_out = 0.02;
  std::size_t n_labels = 4;
  double label_noise = 0.3;
};

struct CommunityGraph {
  Graph graph;
  std::vector<std::uint32_t> community;
};

CommunityGraph two_community_graph(const CommunityConfig& cfg, Rng& rng);
// Featureless edges, no targets.
Dataset two_community_dataset(std::size_t n_graphs, const CommunityConfig& cfg, std::uint64_t seed);

// Random undirected graphs whose class only shows in the edge features:
// class c edges carry Normal(mean[c], 1). Topology and vertex labels are drawn
// from the same distribution for both classes.
struct EdgeSignalConfig {
  std::size_t n_graphs = 500;
  std::size_t n_vertices = 20;
  double edge_p = 0.2;
  std::size_t n_labels = 3;
  double mean0 = 0.0;
  double mean1 = 3.0;
};
Dataset edge_signal_dataset(const EdgeSignalConfig& cfg, std::uint64_t seed);

// Single directed graph with about `n_edges` edges, mean in-degree 5,
// categorical vertex labels and one continuous edge feature.
Graph scaling_graph(std::size_t n_edges, std::uint64_t seed);

// Small random dataset for property tests.
struct RandomDatasetConfig {
  std::size_t n_graphs = 5;
  std::size_t max_vertices = 6;
  std::size_t max_edges = 10;
  FeatureKind vertex_kind = FeatureKind::categorical;
  FeatureKind edge_kind = FeatureKind::continuous;
  std::size_t domain = 3;  // categorical domain
  std::size_t dim = 2;     // continuous width
};
Dataset random_dataset(const RandomDatasetConfig& cfg, Rng& rng);

}  // namespace ecgmm
