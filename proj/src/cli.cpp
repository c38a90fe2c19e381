#include "ecgmm/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

#include "ecgmm/embeddings.hpp"
#include "ecgmm/error.hpp"
#include "ecgmm/evaluation.hpp"
#include "ecgmm/format.hpp"
#include "ecgmm/graph_io.hpp"
#include "ecgmm/linkpred.hpp"
#include "ecgmm/log.hpp"
#include "ecgmm/parallel.hpp"
#include "ecgmm/run_config.hpp"
#include "ecgmm/serialization.hpp"
#include "ecgmm/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ecgmm {

namespace {

// Files are written under a temporary name and renamed into place; on failure
// everything written so far is removed.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  ~Outputs() {
    if (!committed_) rollback();
  }

  fs::path write(const std::string& name, const std::function<void(std::ostream&)>& fill,
                 bool binary = false) {
    fs::create_directories(dir_);
    const fs::path final_path = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
      if (!out) throw InputError("cannot write " + tmp.string());
      pending_ = tmp;
      fill(out);
      out.flush();
      if (!out) throw FormatError("failed writing " + tmp.string());
    }
    fs::rename(tmp, final_path);
    pending_.reset();
    written_.push_back(final_path);
    return final_path;
  }

  void commit() { committed_ = true; }

 private:
  void rollback() {
    std::error_code ec;
    if (pending_) fs::remove(*pending_, ec);
    for (const auto& p : written_) fs::remove(p, ec);
  }

  fs::path dir_;
  std::vector<fs::path> written_;
  std::optional<fs::path> pending_;
  bool committed_ = false;
};

struct Common {
  std::string config;
  std::string model;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

RunConfig resolve(const Common& c) {
  RunConfig rc = load_run_config(c.config);
  if (c.seed) rc.apply_seed(*c.seed);
  if (!c.out.empty()) rc.output_dir = c.out;
  return rc;
}

StackModel require_model(const Common& c) {
  if (c.model.empty()) throw ConfigError("--model is required");
  if (!fs::exists(c.model)) throw InputError("model file does not exist: " + c.model);
  return load_model(c.model);
}

int cmd_train(const Common& c) {
  const RunConfig rc = resolve(c);
  if (rc.stacks.size() != 1) throw ConfigError("train needs exactly one stack configuration, not a grid");
  const Dataset ds = load_dataset(rc.dataset);
  auto result = train_stack(ds, rc.stacks[0]);
  Outputs out(rc.output_dir);
  out.write("model.json", [&](std::ostream& o) { o << to_json(result.model).dump() << '\n'; });
  out.write("training_log.csv", [&](std::ostream& o) { write_training_log_csv(result.model, o); });
  out.commit();
  log_info("wrote model and training log to {}", rc.output_dir.string());
  return kExitOk;
}

int cmd_embed(const Common& c) {
  const RunConfig rc = resolve(c);
  if (rc.embeddings.size() != 1) throw ConfigError("embed needs exactly one embedding configuration");
  const StackModel model = require_model(c);
  const Dataset ds = load_dataset(rc.dataset);
  const GraphBatch batch = GraphBatch::from(ds);
  const FrozenStates fs = infer_stack(model, batch);
  Outputs out(rc.output_dir);
  for (auto kind : rc.embed.kinds) {
    const Matrix m = kind == EmbeddingKind::graph    ? graph_embedding(fs, rc.embeddings[0], batch)
                     : kind == EmbeddingKind::vertex ? vertex_embedding(fs, rc.embeddings[0], batch)
                                                     : edge_embedding(fs);
    const std::string stem = "embeddings_" + to_string(kind);
    if (rc.embed.csv) {
      out.write(stem + ".csv", [&](std::ostream& o) { write_embedding_csv(m, kind, batch, o); });
    }
    if (rc.embed.binary) {
      out.write(stem + ".bin", [&](std::ostream& o) { write_embedding_binary(m, kind, o); }, true);
    }
  }
  out.commit();
  return kExitOk;
}

int cmd_eval_linkpred(const RunConfig& rc, const Dataset& ds) {
  if (rc.link.graph >= ds.graphs.size()) throw ConfigError("linkpred.graph index out of range");
  const auto split = linkpred_prepare(ds.graphs[rc.link.graph], ds.undirected, rc.link.val_frac,
                                      rc.link.test_frac, rc.link.neg_ratio, rc.seed);
  json modes = json::array();
  std::ostringstream csv;
  csv << "mode,val_accuracy,val_auc,test_accuracy,test_auc,stack,mlp\n";
  for (auto mode : rc.link.modes) {
    double best = -1.0;
    LinkEval best_eval;
    std::size_t best_s = 0, best_m = 0;
    for (std::size_t s = 0; s < rc.stacks.size(); ++s) {
      for (std::size_t m = 0; m < rc.mlps.size(); ++m) {
        LinkTrainConfig cfg{mode, rc.stacks[s], rc.mlps[m], rc.link.negative_aware};
        const auto p = train_link_predictor(split, cfg);
        const auto e = evaluate_link_predictor(p, split);
        if (e.val.accuracy > best) {
          best = e.val.accuracy;
          best_eval = e;
          best_s = s;
          best_m = m;
        }
      }
    }
    modes.push_back({{"mode", to_string(mode)},
                     {"val_accuracy", best_eval.val.accuracy},
                     {"val_auc", best_eval.val.auc},
                     {"test_accuracy", best_eval.test.accuracy},
                     {"test_auc", best_eval.test.auc},
                     {"stack", best_s},
                     {"mlp", best_m}});
    csv << to_string(mode) << ',' << format_double(best_eval.val.accuracy) << ','
        << format_double(best_eval.val.auc) << ',' << format_double(best_eval.test.accuracy) << ','
        << format_double(best_eval.test.auc) << ',' << best_s << ',' << best_m << '\n';
  }
  json report = {{"task", "linkpred"},
                 {"n_train_pairs", split.train_pairs.size()},
                 {"n_val_pairs", split.val.size()},
                 {"n_test_pairs", split.test.size()},
                 {"results", modes},
                 {"config", rc.source}};
  report["config"]["seed"] = rc.seed;
  Outputs out(rc.output_dir);
  out.write("report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  out.write("report.csv", [&](std::ostream& o) { o << csv.str(); });
  out.commit();
  return kExitOk;
}

int cmd_eval(const Common& c) {
  const RunConfig rc = resolve(c);
  if (rc.task == Task::linkpred) return cmd_eval_linkpred(rc, load_dataset(rc.dataset));
  if (rc.task != Task::classify && rc.task != Task::regress) {
    throw ConfigError("eval runs classify, regress or linkpred tasks, not " + to_string(rc.task));
  }
  // binning happens per fold so the bin range never sees test graphs
  DatasetSpec spec = rc.dataset;
  EvalOptions opts = rc.eval;
  opts.edge_bins = std::exchange(spec.edge_bins, 0);
  const Dataset ds = load_dataset(spec);
  EvalReport report = rc.task == Task::classify ? evaluate_classification(ds, rc.grid(), opts)
                                                : evaluate_regression(ds, rc.grid(), opts);
  report.config["run"] = rc.source;
  report.config["run"]["seed"] = rc.seed;
  Outputs out(rc.output_dir);
  out.write("report.json", [&](std::ostream& o) { o << report.to_json().dump(2) << '\n'; });
  out.write("report.csv", [&](std::ostream& o) { report.write_csv(o); });
  out.commit();
  log_info("{} {} = {:.4f} +- {:.4f}", report.task, report.metric, report.mean, report.stddev);
  return kExitOk;
}

int cmd_stats(const Common& c) {
  const RunConfig rc = resolve(c);
  const StackModel model = require_model(c);
  const Dataset ds = load_dataset(rc.dataset);
  const auto hist = edge_state_histogram(infer_stack(model, ds));
  Outputs out(rc.output_dir);
  out.write("edge_state_histogram.csv", [&](std::ostream& o) {
    o << "layer";
    const std::size_t c_e = hist.empty() ? 0 : hist[0].size();
    for (std::size_t s = 0; s < c_e; ++s) o << ",state_" << s;
    o << ",total\n";
    for (std::size_t l = 0; l < hist.size(); ++l) {
      o << l;
      std::size_t total = 0;
      for (auto n : hist[l]) {
        o << ',' << n;
        total += n;
      }
      o << ',' << total << '\n';
    }
  });
  out.commit();
  return kExitOk;
}

struct GenerateArgs {
  std::string kind = "two_community";
  std::string out;
  std::size_t graphs = 200;
  std::size_t vertices = 30;
  std::size_t edges = 10000;
  std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& g) {
  Dataset ds;
  if (g.kind == "two_community") {
    CommunityConfig cc;
    cc.n_vertices = g.vertices;
    ds = two_community_dataset(g.graphs, cc, g.seed);
  } else if (g.kind == "edge_signal") {
    EdgeSignalConfig ec;
    ec.n_graphs = g.graphs;
    ec.n_vertices = g.vertices;
    ds = edge_signal_dataset(ec, g.seed);
  } else if (g.kind == "scaling") {
    ds.graphs.push_back(scaling_graph(g.edges, g.seed));
    ds.vertex_meta = {FeatureKind::categorical, 1, 5, {}};
    ds.edge_meta = {FeatureKind::continuous, 1, 0, {}};
  } else {
    throw ConfigError("unknown generator '" + g.kind + "'");
  }
  const fs::path path(g.out);
  Outputs out(path.has_parent_path() ? path.parent_path() : fs::path("."));
  out.write(path.filename().string(), [&](std::ostream& o) { write_jsonl(ds, o); });
  out.commit();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"E-CGMM: layer-wise generative graph embeddings"};
  app.require_subcommand(1);
  Common common;
  GenerateArgs gen;

  auto add_common = [&](CLI::App* sub, bool needs_model) {
    sub->add_option("--config", common.config, "run configuration (JSON)")->required();
    auto* m = sub->add_option("--model", common.model, "trained model file");
    if (needs_model) m->required();
    sub->add_option("--out", common.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", common.seed, "run seed (overrides the config)");
    sub->add_option("--threads", common.threads, "worker threads; 0 uses all cores");
  };
  auto* train = app.add_subcommand("train", "train a stack; writes model.json and training_log.csv");
  add_common(train, false);
  auto* embed = app.add_subcommand("embed", "write graph/vertex/edge embeddings");
  add_common(embed, true);
  auto* eval = app.add_subcommand("eval", "cross-validated classification/regression or link prediction");
  add_common(eval, false);
  auto* stats = app.add_subcommand("stats", "edge-state histogram per layer");
  add_common(stats, true);
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset as JSONL");
  generate->add_option("--kind", gen.kind, "two_community | edge_signal | scaling");
  generate->add_option("--out", gen.out, "output JSONL file")->required();
  generate->add_option("--graphs", gen.graphs);
  generate->add_option("--vertices", gen.vertices);
  generate->add_option("--edges", gen.edges);
  generate->add_option("--seed", gen.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out_msg, err_msg;
    const int code = app.exit(e, out_msg, err_msg);
    err << out_msg.str() << err_msg.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_threads(common.threads);
    if (train->parsed()) return cmd_train(common);
    if (embed->parsed()) return cmd_embed(common);
    if (eval->parsed()) return cmd_eval(common);
    if (stats->parsed()) return cmd_stats(common);
    if (generate->parsed()) return cmd_generate(gen);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ecgmm
