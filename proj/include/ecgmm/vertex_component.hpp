#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecgmm/distributions.hpp"
#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

// One layer's vertex-centric network. `transition` is C_E x C_V x C_V, `sp`
// weights the C_E edge-state groups and `mixture` is the prior used when a
// vertex has no context (layer 0, or no incoming edges).
struct VertexLayerParams {
  Emission emission;
  TransitionTensor transition;
  SPPrior sp;
  std::vector<double> mixture;
  std::size_t c_v = 0;
  std::size_t c_e = 0;

  void validate() const;
  bool operator==(const VertexLayerParams&) const = default;
};

// Frozen states of the previous layer. Both null at layer 0.
struct PrevStates {
  const Matrix* vertex = nullptr;  // n x C_V
  const Matrix* edge = nullptr;    // m x C_E
  bool empty() const { return vertex == nullptr; }
};

// Per vertex u: ctx(u, a*C_V + j) is the neighbour state distribution of edge
// group a and mass(u, a) the total edge posterior mass of that group.
struct VertexContext {
  std::size_t c_e = 0;
  std::size_t c_v = 0;
  Matrix ctx;
  Matrix mass;
};

VertexContext compute_vertex_context(const NeighborhoodIndex& idx, const Matrix& prev_vertex,
                                     const Matrix& prev_edge);
VertexContext compute_vertex_context(const Graph& g, const NeighborhoodIndex& idx,
                                     const Matrix& prev_vertex, const Matrix& prev_edge);

// P(Q_u = i | context); the mixture prior when u has no context.
std::vector<double> vertex_prior(const VertexContext& ctx, const VertexLayerParams& params,
                                 std::size_t u);

struct EStepResult {
  SuffStats stats;
  double log_likelihood = 0.0;
  Matrix posteriors;
};

struct InferResult {
  Matrix posteriors;
  std::vector<std::uint32_t> states;
  double log_likelihood = 0.0;
};

EStepResult vertex_e_step(const GraphBatch& batch, const VertexLayerParams& params,
                          const PrevStates& prev, Execution exec = Execution::parallel);
VertexLayerParams vertex_m_step(const SuffStats& stats, const VertexLayerParams& prev);
InferResult vertex_infer(const GraphBatch& batch, const VertexLayerParams& params,
                         const PrevStates& prev, Execution exec = Execution::parallel);

// Responsibility tensor of one vertex as the E-step computes it: C_V x C_E x C_V
// entries indexed (i, a, j), or C_V entries when the vertex uses the mixture prior.
struct VertexResponsibilities {
  bool uses_mixture = false;
  std::vector<double> values;
};
VertexResponsibilities vertex_responsibilities(const GraphBatch& batch,
                                               const VertexLayerParams& params,
                                               const PrevStates& prev, std::size_t u);

VertexLayerParams init_vertex_params(Rng& rng, const Features& x, std::size_t domain,
                                     std::size_t c_v, std::size_t c_e);

std::uint32_t argmax_state(std::span<const double> row);

}  // namespace ecgmm
