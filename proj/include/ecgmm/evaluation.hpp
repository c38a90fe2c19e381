#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgmm/embeddings.hpp"
#include "ecgmm/graph.hpp"
#include "ecgmm/mlp.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/stack.hpp"

namespace ecgmm {

// Candidate configurations; every (stack, embedding, mlp) triple is tried.
struct SelectionGrid {
  std::vector<StackConfig> stacks;
  std::vector<EmbeddingConfig> embeddings;
  std::vector<MLPConfig> mlps;
  std::size_t size() const { return stacks.size() * embeddings.size() * mlps.size(); }
};

struct EvalOptions {
  std::size_t folds = 10;
  double inner_val_fraction = 0.1;
  std::uint64_t seed = 0;
  Execution exec = Execution::parallel;
  // >0: bin scalar edge features per outer fold, range from the non-test graphs
  std::size_t edge_bins = 0;
};

struct GridChoice {
  std::size_t stack = 0;
  std::size_t embedding = 0;
  std::size_t mlp = 0;
  bool operator==(const GridChoice&) const = default;
};

struct FoldResult {
  std::size_t fold = 0;
  double test_score = 0.0;  // accuracy, or MAE for regression
  double val_score = 0.0;   // selection score of the chosen triple
  GridChoice chosen;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
};

struct EvalReport {
  std::string task;    // classification | regression
  std::string metric;  // accuracy | mae
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over folds
  double wall_seconds = 0.0;
  nlohmann::json config;  // echo of the run configuration

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

// Test index sets of a seeded k-fold partition; stratified when labels are given.
std::vector<std::vector<std::size_t>> kfold_test_sets(std::size_t n, std::size_t k, std::uint64_t seed,
                                                      std::span<const std::uint32_t> labels = {});

EvalReport evaluate_classification(const Dataset& ds, const SelectionGrid& grid,
                                   const EvalOptions& opts = {});
EvalReport evaluate_regression(const Dataset& ds, const SelectionGrid& grid,
                               const EvalOptions& opts = {});

nlohmann::json to_json(const EmbeddingConfig& c);
nlohmann::json to_json(const MLPConfig& c);
nlohmann::json to_json(const SelectionGrid& g);

}  // namespace ecgmm
