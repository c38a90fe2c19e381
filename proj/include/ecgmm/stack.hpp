#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ecgmm/edge_component.hpp"
#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/vertex_component.hpp"

namespace ecgmm {

enum class StateMode { discrete, continuous };

std::string to_string(StateMode mode);
StateMode state_mode_from_string(const std::string& s);

struct StackConfig {
  std::size_t n_layers = 1;
  std::size_t c_v = 20;
  std::size_t c_e = 5;
  std::size_t em_iterations = 20;
  // Stop a layer's EM early once the relative likelihood gain drops below
  // this value; 0 runs exactly em_iterations.
  double em_rel_tolerance = 0.0;
  StateMode state_mode = StateMode::continuous;
  std::uint64_t seed = 0;

  // Emission families. Filled from the training data by train_stack.
  FeatureKind vertex_kind = FeatureKind::none;
  std::size_t vertex_width = 0;  // categorical domain or Gaussian dimension
  FeatureKind edge_kind = FeatureKind::none;
  std::size_t edge_width = 0;

  void validate() const;
  bool operator==(const StackConfig&) const = default;
};

struct LayerParams {
  VertexLayerParams vertex;
  EdgeLayerParams edge;
  bool operator==(const LayerParams&) const = default;
};

struct TraceEntry {
  std::size_t layer = 0;
  std::string component;  // "vertex" or "edge"
  std::size_t iteration = 0;
  double log_likelihood = 0.0;
  bool operator==(const TraceEntry&) const = default;
};

struct StackModel {
  std::vector<LayerParams> layers;
  StackConfig config;
  std::vector<TraceEntry> training_log;
  bool operator==(const StackModel&) const = default;
};

// Per layer, vertex (n_total x C_V) and edge (m_total x C_E) states over the
// flattened dataset. One-hot rows in discrete mode.
struct FrozenStates {
  StateMode mode = StateMode::continuous;
  std::vector<Matrix> vertex;
  std::vector<Matrix> edge;
  std::size_t n_layers() const { return vertex.size(); }
  bool operator==(const FrozenStates&) const = default;
};

struct TrainResult {
  StackModel model;
  FrozenStates states;
};

// Called after each layer is trained and frozen.
using LayerObserver = std::function<void(std::size_t layer, const StackModel&, const FrozenStates&)>;

TrainResult train_stack(const Dataset& ds, const StackConfig& cfg,
                        Execution exec = Execution::parallel, const LayerObserver& observer = {});
TrainResult train_stack(const GraphBatch& batch, const StackConfig& cfg,
                        Execution exec = Execution::parallel, const LayerObserver& observer = {});

FrozenStates infer_stack(const StackModel& model, const Dataset& ds,
                         Execution exec = Execution::parallel);
FrozenStates infer_stack(const StackModel& model, const GraphBatch& batch,
                         Execution exec = Execution::parallel);

// counts[layer][state] = number of edges whose most likely state is `state`.
std::vector<std::vector<std::size_t>> edge_state_histogram(const FrozenStates& fs);

// Fills the emission families of `cfg` from a batch; throws ConfigError when a
// family is already set and disagrees.
StackConfig resolve_emissions(const StackConfig& cfg, const GraphBatch& batch,
                              std::size_t vertex_domain, std::size_t edge_domain);

Matrix freeze(const Matrix& posteriors, StateMode mode);

// Seed of the component (0 vertex, 1 edge) at `layer`.
std::uint64_t component_seed(std::uint64_t seed, std::size_t layer, std::size_t component);

}  // namespace ecgmm
