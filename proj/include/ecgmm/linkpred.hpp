#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgmm/graph.hpp"
#include "ecgmm/metrics.hpp"
#include "ecgmm/mlp.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/stack.hpp"

namespace ecgmm {

struct LabeledPairs {
  std::vector<Edge> pairs;
  std::vector<std::uint32_t> labels;  // 1 edge, 0 non-edge
  std::size_t size() const { return pairs.size(); }
};

struct LinkSplit {
  Graph train;               // held-out positives removed
  LabeledPairs train_pairs;  // remaining positives plus sampled negatives
  LabeledPairs val;
  LabeledPairs test;
  bool undirected = true;
};

// For undirected graphs a positive is an unordered pair and both directions
// leave the training graph. Negatives are uniform non-edges without self
// loops, distinct across all sets. Throws SamplingError when negatives cannot
// be found within a bounded number of draws.
LinkSplit linkpred_prepare(const Graph& g, bool undirected, double val_frac, double test_frac,
                           double neg_ratio, std::uint64_t seed);

enum class LinkMode { ecgmm, cgmm_baseline };
std::string to_string(LinkMode m);
LinkMode link_mode_from_string(const std::string& s);

struct LinkTrainConfig {
  LinkMode mode = LinkMode::ecgmm;
  StackConfig stack;
  MLPConfig mlp;
  // Also feed the sampled training negatives to the generative stack, tagged
  // with edge feature 0 (positives 1).
  bool negative_aware = false;
};

class LinkPredictor {
 public:
  LinkMode mode = LinkMode::ecgmm;
  bool undirected = true;
  std::size_t n_vertices = 0;
  StackModel model;
  FrozenStates states;               // frozen states of the training graph
  std::vector<Predictor> per_layer;  // E-CGMM mode
  Predictor pair_mlp;                // baseline mode

  // Mean over layers of the per-layer probabilities (E-CGMM) or the baseline
  // MLP probability; symmetrized for undirected graphs.
  double score(std::uint32_t u, std::uint32_t v) const;
  std::vector<double> score(const LabeledPairs& pairs) const;
  // Per-layer input row of the pair (u, v).
  std::vector<double> layer_features(std::size_t layer, std::uint32_t u, std::uint32_t v) const;
  std::vector<double> baseline_features(std::uint32_t u, std::uint32_t v) const;

 private:
  double directed_score(std::uint32_t u, std::uint32_t v) const;
};

LinkPredictor train_link_predictor(const LinkSplit& split, const LinkTrainConfig& cfg,
                                   Execution exec = Execution::parallel);

double linkpred_score(const LinkPredictor& p, std::uint32_t u, std::uint32_t v);

struct LinkEval {
  BinaryMetrics val;
  BinaryMetrics test;
};
LinkEval evaluate_link_predictor(const LinkPredictor& p, const LinkSplit& split);

}  // namespace ecgmm
