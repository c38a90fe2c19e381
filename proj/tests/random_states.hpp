#pragma once

#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"
#include "ecgmm/rng.hpp"
#include "ecgmm/synthetic.hpp"

// Rows drawn uniformly from the simplex.
inline ecgmm::Matrix random_posteriors(ecgmm::Rng& rng, std::size_t rows, std::size_t cols) {
  ecgmm::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto p = ecgmm::dirichlet_uniform(rng, cols);
    std::copy(p.begin(), p.end(), m.row(r).begin());
  }
  return m;
}

inline ecgmm::Matrix stack_rows(const ecgmm::Matrix& a, const ecgmm::Matrix& b) {
  ecgmm::Matrix m(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), m.data.begin());
  std::copy(b.data.begin(), b.data.end(), m.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return m;
}

inline ecgmm::Dataset tiny_dataset(ecgmm::Rng& rng, std::size_t graphs = 1) {
  ecgmm::RandomDatasetConfig cfg;
  cfg.n_graphs = graphs;
  cfg.max_vertices = 3;
  cfg.max_edges = 4;
  cfg.domain = 3;
  cfg.dim = 1;
  return ecgmm::random_dataset(cfg, rng);
}

inline ecgmm::Dataset concat(const ecgmm::Dataset& a, const ecgmm::Dataset& b) {
  ecgmm::Dataset out = a;
  out.graphs.insert(out.graphs.end(), b.graphs.begin(), b.graphs.end());
  return out;
}
