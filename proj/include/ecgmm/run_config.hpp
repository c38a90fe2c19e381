#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecgmm/embeddings.hpp"
#include "ecgmm/evaluation.hpp"
#include "ecgmm/graph.hpp"
#include "ecgmm/linkpred.hpp"
#include "ecgmm/mlp.hpp"
#include "ecgmm/stack.hpp"

namespace ecgmm {

enum class Task { classify, regress, linkpred, embed, stats };
std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct DatasetSpec {
  std::filesystem::path path;
  std::string format = "jsonl";  // jsonl | tu
  bool undirected = true;         // tu only: symmetrize edge lists
  bool degree_features = false;   // replace vertex features by in-degree
  std::size_t edge_bins = 0;      // >0: discretize scalar edge features
};

struct LinkSpec {
  std::size_t graph = 0;
  double val_frac = 0.05;
  double test_frac = 0.1;
  double neg_ratio = 1.0;
  std::vector<LinkMode> modes{LinkMode::ecgmm, LinkMode::cgmm_baseline};
  bool negative_aware = false;
};

struct EmbedSpec {
  std::vector<EmbeddingKind> kinds{EmbeddingKind::graph};
  bool csv = true;
  bool binary = false;
};

// Every object in "stack", "embedding" and "mlp" may hold lists as values;
// the grid is their cartesian product. A list of objects concatenates grids.
struct RunConfig {
  Task task = Task::classify;
  DatasetSpec dataset;
  std::vector<StackConfig> stacks{StackConfig{}};
  std::vector<EmbeddingConfig> embeddings{EmbeddingConfig{}};
  std::vector<MLPConfig> mlps{MLPConfig{}};
  EvalOptions eval;
  LinkSpec link;
  EmbedSpec embed;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  nlohmann::json source;  // the parsed document, echoed into reports

  // Sets the run seed on every stack, MLP and split.
  void apply_seed(std::uint64_t s);
  SelectionGrid grid() const { return {stacks, embeddings, mlps}; }
};

// Relative dataset and output paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<nlohmann::json> expand_grid(const nlohmann::json& j);
StackConfig parse_stack_config(const nlohmann::json& j);
EmbeddingConfig parse_embedding_config(const nlohmann::json& j);
MLPConfig parse_mlp_config(const nlohmann::json& j);

// Loads and prepares the dataset; throws InputError naming the path when it
// does not exist.
Dataset load_dataset(const DatasetSpec& spec);

}  // namespace ecgmm
