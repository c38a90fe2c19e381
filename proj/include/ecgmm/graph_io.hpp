#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>

#include "ecgmm/graph.hpp"

namespace ecgmm {

struct TuOptions {
  // Symmetrize edge lists that are not already symmetric.
  bool undirected = true;
  // Graph attributes are treated as regression targets when no graph labels exist.
  bool regression_targets = true;
};

// Reads the TU benchmark layout: <dir>/<DS>_A.txt, <DS>_graph_indicator.txt and the
// optional <DS>_node_labels.txt, _node_attributes.txt, _edge_labels.txt,
// _edge_attributes.txt, _graph_labels.txt, _graph_attributes.txt.
Dataset load_tu_dataset(const std::filesystem::path& dir, const TuOptions& options = {});

Dataset load_jsonl(const std::filesystem::path& path);
Dataset read_jsonl(std::istream& in);
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);
void write_jsonl(const Dataset& ds, std::ostream& out);

// Equal-width binning of scalar continuous edge features. The range comes from
// the graphs listed in `train_graphs` (all graphs when empty).
Dataset discretize_edges(const Dataset& ds, std::size_t n_bins,
                         std::span<const std::size_t> train_graphs = {});

}  // namespace ecgmm
