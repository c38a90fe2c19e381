#include "ecgmm/run_config.hpp"

#include <fstream>
#include <set>

#include "ecgmm/error.hpp"
#include "ecgmm/graph_io.hpp"
#include "ecgmm/rng.hpp"

using nlohmann::json;

namespace ecgmm {

std::string to_string(Task t) {
  switch (t) {
    case Task::classify: return "classify";
    case Task::regress: return "regress";
    case Task::linkpred: return "linkpred";
    case Task::embed: return "embed";
    case Task::stats: return "stats";
  }
  return "classify";
}

Task task_from_string(const std::string& s) {
  if (s == "classify") return Task::classify;
  if (s == "regress") return Task::regress;
  if (s == "linkpred") return Task::linkpred;
  if (s == "embed") return Task::embed;
  if (s == "stats") return Task::stats;
  throw ConfigError("unknown task '" + s + "'");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "': " + j.at(key).dump());
  }
}

}  // namespace

std::vector<json> expand_grid(const json& j) {
  std::vector<json> out;
  if (j.is_array()) {
    for (const auto& item : j) {
      auto part = expand_grid(item);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (!j.is_object()) throw ConfigError("grid entries must be objects");
  out.push_back(json::object());
  for (const auto& [key, value] : j.items()) {
    std::vector<json> next;
    const bool list = value.is_array();
    if (list && value.empty()) throw ConfigError("empty list for '" + key + "'");
    for (const auto& partial : out) {
      if (list) {
        for (const auto& v : value) {
          json p = partial;
          p[key] = v;
          next.push_back(std::move(p));
        }
      } else {
        json p = partial;
        p[key] = value;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

StackConfig parse_stack_config(const json& j) {
  check_keys(j, {"n_layers", "c_v", "c_e", "em_iterations", "em_rel_tolerance", "state_mode"}, "stack");
  StackConfig c;
  c.n_layers = get(j, "n_layers", c.n_layers);
  c.c_v = get(j, "c_v", c.c_v);
  c.c_e = get(j, "c_e", c.c_e);
  c.em_iterations = get(j, "em_iterations", c.em_iterations);
  c.em_rel_tolerance = get(j, "em_rel_tolerance", c.em_rel_tolerance);
  c.state_mode = state_mode_from_string(get(j, "state_mode", to_string(c.state_mode)));
  c.validate();
  return c;
}

EmbeddingConfig parse_embedding_config(const json& j) {
  check_keys(j, {"representation", "readout", "include_edge_unigrams"}, "embedding");
  EmbeddingConfig c;
  c.representation = representation_from_string(get(j, "representation", to_string(c.representation)));
  c.readout = readout_from_string(get(j, "readout", to_string(c.readout)));
  c.include_edge_unigrams = get(j, "include_edge_unigrams", c.include_edge_unigrams);
  return c;
}

MLPConfig parse_mlp_config(const json& j) {
  check_keys(j, {"hidden_dim", "learning_rate", "weight_decay", "max_epochs", "patience", "batch_size"},
             "mlp");
  MLPConfig c;
  c.hidden_dim = get(j, "hidden_dim", c.hidden_dim);
  c.learning_rate = get(j, "learning_rate", c.learning_rate);
  c.weight_decay = get(j, "weight_decay", c.weight_decay);
  c.max_epochs = get(j, "max_epochs", c.max_epochs);
  c.patience = get(j, "patience", c.patience);
  c.batch_size = get(j, "batch_size", c.batch_size);
  c.validate();
  return c;
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  eval.seed = s;
  for (auto& st : stacks) st.seed = s;
  for (std::size_t i = 0; i < mlps.size(); ++i) mlps[i].seed = derive_seed(s, 0x31b, i);
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"task", "dataset", "stack", "embedding", "mlp", "eval", "linkpred", "embed", "output_dir", "seed"},
             "run config");
  RunConfig c;
  c.source = j;
  if (!j.contains("task")) throw ConfigError("run config needs a 'task'");
  c.task = task_from_string(get<std::string>(j, "task", ""));

  if (!j.contains("dataset")) throw ConfigError("run config needs a 'dataset'");
  const auto& d = j.at("dataset");
  check_keys(d, {"path", "format", "undirected", "degree_features", "edge_bins"}, "dataset");
  if (!d.contains("path")) throw ConfigError("dataset needs a 'path'");
  c.dataset.path = get<std::string>(d, "path", "");
  if (c.dataset.path.is_relative() && !base_dir.empty()) c.dataset.path = base_dir / c.dataset.path;
  c.dataset.format = get(d, "format", c.dataset.format);
  if (c.dataset.format != "jsonl" && c.dataset.format != "tu") {
    throw ConfigError("dataset format must be 'jsonl' or 'tu'");
  }
  c.dataset.undirected = get(d, "undirected", c.dataset.undirected);
  c.dataset.degree_features = get(d, "degree_features", c.dataset.degree_features);
  c.dataset.edge_bins = get(d, "edge_bins", c.dataset.edge_bins);

  if (j.contains("stack")) {
    c.stacks.clear();
    for (const auto& s : expand_grid(j.at("stack"))) c.stacks.push_back(parse_stack_config(s));
  }
  if (j.contains("embedding")) {
    c.embeddings.clear();
    for (const auto& s : expand_grid(j.at("embedding"))) c.embeddings.push_back(parse_embedding_config(s));
  }
  if (j.contains("mlp")) {
    c.mlps.clear();
    for (const auto& s : expand_grid(j.at("mlp"))) c.mlps.push_back(parse_mlp_config(s));
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    check_keys(e, {"folds", "inner_val_fraction"}, "eval");
    c.eval.folds = get(e, "folds", c.eval.folds);
    c.eval.inner_val_fraction = get(e, "inner_val_fraction", c.eval.inner_val_fraction);
  }
  if (j.contains("linkpred")) {
    const auto& l = j.at("linkpred");
    check_keys(l, {"graph", "val_frac", "test_frac", "neg_ratio", "modes", "negative_aware"}, "linkpred");
    c.link.graph = get(l, "graph", c.link.graph);
    c.link.val_frac = get(l, "val_frac", c.link.val_frac);
    c.link.test_frac = get(l, "test_frac", c.link.test_frac);
    c.link.neg_ratio = get(l, "neg_ratio", c.link.neg_ratio);
    c.link.negative_aware = get(l, "negative_aware", c.link.negative_aware);
    if (l.contains("modes")) {
      c.link.modes.clear();
      for (const auto& m : get<std::vector<std::string>>(l, "modes", {})) c.link.modes.push_back(link_mode_from_string(m));
      if (c.link.modes.empty()) throw ConfigError("linkpred.modes is empty");
    }
  }
  if (j.contains("embed")) {
    const auto& e = j.at("embed");
    check_keys(e, {"kinds", "csv", "binary"}, "embed");
    if (e.contains("kinds")) {
      c.embed.kinds.clear();
      for (const auto& k : get<std::vector<std::string>>(e, "kinds", {})) c.embed.kinds.push_back(embedding_kind_from_string(k));
    }
    c.embed.csv = get(e, "csv", c.embed.csv);
    c.embed.binary = get(e, "binary", c.embed.binary);
    if (!c.embed.csv && !c.embed.binary) throw ConfigError("embed needs csv or binary output");
  }
  c.output_dir = get<std::string>(j, "output_dir", c.output_dir.string());
  if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
  c.apply_seed(get<std::uint64_t>(j, "seed", 0));
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (!std::filesystem::exists(spec.path)) {
    throw InputError("dataset path does not exist: " + spec.path.string());
  }
  Dataset ds = spec.format == "tu" ? load_tu_dataset(spec.path, TuOptions{spec.undirected, true})
                                   : load_jsonl(spec.path);
  if (spec.degree_features) ds = with_degree_features(ds);
  if (spec.edge_bins > 0) ds = discretize_edges(ds, spec.edge_bins);
  return ds;
}

}  // namespace ecgmm
