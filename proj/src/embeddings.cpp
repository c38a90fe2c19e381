#include "ecgmm/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ecgmm/error.hpp"
#include "ecgmm/format.hpp"
#include "ecgmm/log.hpp"
#include "ecgmm/parallel.hpp"

namespace ecgmm {

std::string to_string(Representation r) {
  return r == Representation::unigram ? "unigram" : "unibigram";
}

std::string to_string(Readout r) { return r == Readout::mean ? "mean" : "sum"; }

Representation representation_from_string(const std::string& s) {
  if (s == "unigram") return Representation::unigram;
  if (s == "unibigram") return Representation::unibigram;
  throw ConfigError("representation must be 'unigram' or 'unibigram', got '" + s + "'");
}

Readout readout_from_string(const std::string& s) {
  if (s == "mean") return Readout::mean;
  if (s == "sum") return Readout::sum;
  throw ConfigError("readout must be 'mean' or 'sum', got '" + s + "'");
}

std::string to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::graph: return "graph";
    case EmbeddingKind::vertex: return "vertex";
    case EmbeddingKind::edge: return "edge";
  }
  return "graph";
}

EmbeddingKind embedding_kind_from_string(const std::string& s) {
  if (s == "graph") return EmbeddingKind::graph;
  if (s == "vertex") return EmbeddingKind::vertex;
  if (s == "edge") return EmbeddingKind::edge;
  throw ConfigError("embedding kind must be graph, vertex or edge, got '" + s + "'");
}

Matrix vertex_bigram(const NeighborhoodIndex& idx, const Matrix& q) {
  if (q.rows != idx.n_vertices()) {
    throw ShapeError("posteriors have " + std::to_string(q.rows) + " rows for " +
                     std::to_string(idx.n_vertices()) + " vertices");
  }
  const std::size_t c = q.cols;
  Matrix out(q.rows, c * c);
  std::vector<double> agg(c);
  for (std::size_t u = 0; u < q.rows; ++u) {
    if (idx.degree(u) == 0) continue;
    std::fill(agg.begin(), agg.end(), 0.0);
    for (auto v : idx.neighbors(u)) {
      const auto qv = q.row(v);
      for (std::size_t j = 0; j < c; ++j) agg[j] += qv[j];
    }
    const auto qu = q.row(u);
    auto dst = out.row(u);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) dst[i * c + j] = qu[i] * agg[j];
    }
  }
  return out;
}

std::size_t vertex_block_dim(const EmbeddingConfig& cfg, std::size_t c_v) {
  return cfg.representation == Representation::unibigram ? c_v + c_v * c_v : c_v;
}

std::size_t graph_embedding_dim(const EmbeddingConfig& cfg, std::size_t n_layers, std::size_t c_v,
                                std::size_t c_e) {
  return n_layers * (vertex_block_dim(cfg, c_v) + (cfg.include_edge_unigrams ? c_e : 0));
}

namespace {

void check_states(const FrozenStates& fs, const GraphBatch& batch) {
  if (fs.vertex.size() != fs.edge.size()) throw ShapeError("vertex and edge layer counts differ");
  for (std::size_t l = 0; l < fs.vertex.size(); ++l) {
    if (fs.vertex[l].rows != batch.n_vertices || fs.edge[l].rows != batch.n_edges()) {
      throw ShapeError("frozen states of layer " + std::to_string(l) +
                       " do not cover the dataset");
    }
  }
}

std::vector<Matrix> bigrams(const FrozenStates& fs, const EmbeddingConfig& cfg,
                            const GraphBatch& batch) {
  std::vector<Matrix> out;
  if (cfg.representation == Representation::unibigram) {
    for (const auto& q : fs.vertex) out.push_back(vertex_bigram(batch.index, q));
  }
  return out;
}

}  // namespace

Matrix graph_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const GraphBatch& batch) {
  check_states(fs, batch);
  const std::size_t layers = fs.n_layers();
  const std::size_t c_v = layers ? fs.vertex[0].cols : 0;
  const std::size_t c_e = layers ? fs.edge[0].cols : 0;
  const std::size_t vdim = vertex_block_dim(cfg, c_v);
  const std::size_t edim = cfg.include_edge_unigrams ? c_e : 0;
  const auto bi = bigrams(fs, cfg, batch);
  Matrix out(batch.n_graphs(), layers * (vdim + edim));

  std::vector<std::size_t> empty;
  for (std::size_t g = 0; g < batch.n_graphs(); ++g) {
    if (batch.vertex_offsets[g] == batch.vertex_offsets[g + 1]) empty.push_back(g);
  }
  for (auto g : empty) log_warn("graph {} has no vertices; its embedding is all zeros", g);

  parallel_for(batch.n_graphs(), [&](std::size_t g) {
    auto dst = out.row(g);
    const auto v0 = batch.vertex_offsets[g], v1 = batch.vertex_offsets[g + 1];
    const auto e0 = batch.edge_offsets[g], e1 = batch.edge_offsets[g + 1];
    std::size_t col = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      for (std::size_t v = v0; v < v1; ++v) {
        const auto q = fs.vertex[l].row(v);
        for (std::size_t i = 0; i < c_v; ++i) dst[col + i] += q[i];
        if (!bi.empty()) {
          const auto b = bi[l].row(v);
          for (std::size_t k = 0; k < b.size(); ++k) dst[col + c_v + k] += b[k];
        }
      }
      if (cfg.readout == Readout::mean && v1 > v0) {
        const double inv = 1.0 / static_cast<double>(v1 - v0);
        for (std::size_t k = 0; k < vdim; ++k) dst[col + k] *= inv;
      }
      col += vdim;
      if (edim > 0) {
        for (std::size_t e = e0; e < e1; ++e) {
          const auto q = fs.edge[l].row(e);
          for (std::size_t i = 0; i < c_e; ++i) dst[col + i] += q[i];
        }
        if (cfg.readout == Readout::mean && e1 > e0) {
          const double inv = 1.0 / static_cast<double>(e1 - e0);
          for (std::size_t k = 0; k < edim; ++k) dst[col + k] *= inv;
        }
        col += edim;
      }
    }
  });
  return out;
}

Matrix graph_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const Dataset& ds) {
  return graph_embedding(fs, cfg, GraphBatch::from(ds));
}

Matrix vertex_embedding(const FrozenStates& fs, const EmbeddingConfig& cfg, const GraphBatch& batch) {
  check_states(fs, batch);
  const std::size_t layers = fs.n_layers();
  const std::size_t c_v = layers ? fs.vertex[0].cols : 0;
  const std::size_t vdim = vertex_block_dim(cfg, c_v);
  const auto bi = bigrams(fs, cfg, batch);
  Matrix out(batch.n_vertices, layers * vdim);
  for (std::size_t v = 0; v < batch.n_vertices; ++v) {
    auto dst = out.row(v);
    for (std::size_t l = 0; l < layers; ++l) {
      const auto q = fs.vertex[l].row(v);
      std::copy(q.begin(), q.end(), dst.begin() + static_cast<std::ptrdiff_t>(l * vdim));
      if (!bi.empty()) {
        const auto b = bi[l].row(v);
        std::copy(b.begin(), b.end(), dst.begin() + static_cast<std::ptrdiff_t>(l * vdim + c_v));
      }
    }
  }
  return out;
}

Matrix edge_embedding(const FrozenStates& fs) {
  const std::size_t layers = fs.n_layers();
  if (layers == 0) return {};
  const std::size_t m = fs.edge[0].rows, c_e = fs.edge[0].cols;
  Matrix out(m, layers * c_e);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t l = 0; l < layers; ++l) {
      const auto q = fs.edge[l].row(e);
      std::copy(q.begin(), q.end(), out.row(e).begin() + static_cast<std::ptrdiff_t>(l * c_e));
    }
  }
  return out;
}

void write_embedding_csv(const Matrix& m, EmbeddingKind kind, const GraphBatch& batch,
                         std::ostream& out) {
  const auto& offsets = kind == EmbeddingKind::edge ? batch.edge_offsets : batch.vertex_offsets;
  const std::size_t expected = kind == EmbeddingKind::graph    ? batch.n_graphs()
                               : kind == EmbeddingKind::vertex ? batch.n_vertices
                                                               : batch.n_edges();
  if (m.rows != expected) throw ShapeError("embedding rows do not match the dataset");
  out << "graph";
  if (kind != EmbeddingKind::graph) out << ',' << to_string(kind);
  for (std::size_t c = 0; c < m.cols; ++c) out << ",f" << c;
  out << '\n';
  std::size_t g = 0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (kind == EmbeddingKind::graph) {
      out << r;
    } else {
      while (offsets[g + 1] <= r) ++g;
      out << g << ',' << (r - offsets[g]);
    }
    for (double v : m.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

constexpr char kMagic[8] = {'E', 'C', 'G', 'M', 'M', 'E', 'M', 'B'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

}  // namespace

void write_embedding_binary(const Matrix& m, EmbeddingKind kind, std::ostream& out) {
  const std::string header =
      nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"dtype", "f64le"}, {"kind", to_string(kind)}}
          .dump();
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = to_le(header.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (double v : m.data) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  }
  if (!out) throw FormatError("failed writing binary embedding");
}

BinaryEmbedding read_embedding_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError("not an ecgmm binary embedding");
  }
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len))) throw FormatError("truncated header");
  len = to_le(len);
  if (len > (1u << 20)) throw FormatError("implausible header length");
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) throw FormatError("truncated header");
  BinaryEmbedding out;
  try {
    const auto j = nlohmann::json::parse(header);
    if (j.at("dtype").get<std::string>() != "f64le") throw FormatError("unsupported dtype");
    out.kind = embedding_kind_from_string(j.at("kind").get<std::string>());
    out.matrix = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad embedding header: ") + e.what());
  }
  for (double& v : out.matrix.data) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) throw FormatError("truncated data");
    v = std::bit_cast<double>(to_le(bits));
  }
  return out;
}

}  // namespace ecgmm
