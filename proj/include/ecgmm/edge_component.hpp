#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ecgmm/distributions.hpp"
#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/vertex_component.hpp"

namespace ecgmm {

inline constexpr std::size_t kSourceGroup = 0;
inline constexpr std::size_t kDestinationGroup = 1;

// One layer's edge-centric network: each edge is a fictitious vertex whose two
// parents are the previous-layer states of its source and destination.
// `transition` is 2 x C_E x C_V.
struct EdgeLayerParams {
  Emission emission;
  TransitionTensor transition;
  SPPrior sp;
  std::size_t c_e = 0;
  std::size_t c_v = 0;

  void validate() const;
  bool operator==(const EdgeLayerParams&) const = default;
};

// P(Q_uv = i | q_u, q_v) = sp[s] T[s,i,:] . q_u + sp[d] T[d,i,:] . q_v
std::vector<double> edge_prior(const EdgeLayerParams& params, std::span<const double> q_src,
                               std::span<const double> q_dst);

// `prev_vertex` null means uniform endpoint context (layer 0).
EStepResult edge_e_step(const GraphBatch& batch, const EdgeLayerParams& params,
                        const Matrix* prev_vertex, Execution exec = Execution::parallel);
EdgeLayerParams edge_m_step(const SuffStats& stats, const EdgeLayerParams& prev);
InferResult edge_infer(const GraphBatch& batch, const EdgeLayerParams& params,
                       const Matrix* prev_vertex, Execution exec = Execution::parallel);

// Responsibilities of one edge indexed (i, a, j): C_E x 2 x C_V entries.
std::vector<double> edge_responsibilities(const GraphBatch& batch, const EdgeLayerParams& params,
                                          const Matrix* prev_vertex, std::size_t e);

EdgeLayerParams init_edge_params(Rng& rng, const Features& a, std::size_t domain, std::size_t c_e,
                                 std::size_t c_v);

}  // namespace ecgmm
