#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"
#include "ecgmm/stack.hpp"

namespace ecgmm {

enum class Representation { unigram, unibigram };
enum class Readout { mean, sum };

std::string to_string(Representation r);
std::string to_string(Readout r);
Representation representation_from_string(const std::string& s);
Readout readout_from_string(const std::string& s);

struct EmbeddingConfig {
  Representation representation = Representation::unigram;
  Readout readout = Readout::mean;
  bool include_edge_unigrams = true;
  bool operator==(const EmbeddingConfig&) const = default;
};

// Row u, column i*C_V + j: sum over incoming neighbours v of q_u(i) q_v(j).
Matrix vertex_bigram(const NeighborhoodIndex& idx, const Matrix& posteriors);

std::size_t vertex_block_dim(const EmbeddingConfig& cfg, std::size_t c_v);
std::size_t graph_embedding_dim(const EmbeddingConfig& cfg, std::size_t n_layers, std::size_t c_v,
                                std::size_t c_e);

// One row per graph. Per layer: vertex readout then edge readout; layers in order.
Matrix graph_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const GraphBatch& batch);
Matrix graph_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const Dataset& ds);

// One row per vertex / edge of the batch, layers concatenated.
Matrix vertex_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const GraphBatch& batch);
Matrix edge_embedding(const FrozenStates& fs);

enum class EmbeddingKind { graph, vertex, edge };
std::string to_string(EmbeddingKind k);
EmbeddingKind embedding_kind_from_string(const std::string& s);

// Id columns first: graph; graph,vertex; or graph,edge (local ids).
void write_embedding_csv(const Matrix& m, EmbeddingKind kind, const GraphBatch& batch,
                         std::ostream& out);

// "ECGMMEMB", uint64 LE header length, JSON header, then rows*cols f64 LE.
void write_embedding_binary(const Matrix& m, EmbeddingKind kind, std::ostream& out);
struct BinaryEmbedding {
  Matrix matrix;
  EmbeddingKind kind = EmbeddingKind::graph;
};
BinaryEmbedding read_embedding_binary(std::istream& in);

}  // namespace ecgmm
