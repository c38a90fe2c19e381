#include "ecgmm/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "ecgmm/error.hpp"
#include "ecgmm/graph_io.hpp"
#include "ecgmm/format.hpp"
#include "ecgmm/log.hpp"
#include "ecgmm/rng.hpp"
#include "ecgmm/serialization.hpp"

namespace ecgmm {

nlohmann::json to_json(const EmbeddingConfig& c) {
  return {{"representation", to_string(c.representation)},
          {"readout", to_string(c.readout)},
          {"include_edge_unigrams", c.include_edge_unigrams}};
}

nlohmann::json to_json(const MLPConfig& c) {
  return {{"hidden_dim", c.hidden_dim},     {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay}, {"max_epochs", c.max_epochs},
          {"patience", c.patience},         {"batch_size", c.batch_size},
          {"loss", to_string(c.loss)},      {"seed", c.seed}};
}

nlohmann::json to_json(const SelectionGrid& g) {
  nlohmann::json j = {{"stacks", nlohmann::json::array()},
                      {"embeddings", nlohmann::json::array()},
                      {"mlps", nlohmann::json::array()}};
  for (const auto& s : g.stacks) j["stacks"].push_back(to_json(s));
  for (const auto& e : g.embeddings) j["embeddings"].push_back(to_json(e));
  for (const auto& m : g.mlps) j["mlps"].push_back(to_json(m));
  return j;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& r : folds) {
    f.push_back({{"fold", r.fold},
                 {"test_score", r.test_score},
                 {"val_score", r.val_score},
                 {"stack", r.chosen.stack},
                 {"embedding", r.chosen.embedding},
                 {"mlp", r.chosen.mlp},
                 {"n_train", r.n_train},
                 {"n_val", r.n_val},
                 {"n_test", r.n_test}});
  }
  return {{"task", task},   {"metric", metric},     {"folds", f},         {"mean", mean},
          {"std", stddev},  {"wall_seconds", wall_seconds}, {"config", config}};
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "fold,metric,test_score,val_score,stack,embedding,mlp,n_train,n_val,n_test\n";
  for (const auto& r : folds) {
    out << r.fold << ',' << metric << ',' << format_double(r.test_score) << ','
        << format_double(r.val_score) << ',' << r.chosen.stack << ',' << r.chosen.embedding << ','
        << r.chosen.mlp << ',' << r.n_train << ',' << r.n_val << ',' << r.n_test << '\n';
  }
}

std::vector<std::vector<std::size_t>> kfold_test_sets(std::size_t n, std::size_t k, std::uint64_t seed,
                                                      std::span<const std::uint32_t> labels) {
  if (k < 2) throw ConfigError("need at least 2 folds");
  if (n < k) {
    throw ConfigError("dataset has " + std::to_string(n) + " graphs, fewer than " +
                      std::to_string(k) + " folds");
  }
  if (!labels.empty() && labels.size() != n) throw ShapeError("one label per item expected");
  Rng rng(derive_seed(seed, 0xf01d));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  if (!labels.empty()) {
    // group by class, keeping the shuffled order inside each class
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return labels[a] < labels[b]; });
  }
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

// Split provenance: selection must only see indices inside the outer
// training fold, and the three sets must be pairwise disjoint.
void assert_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b, const char* what) {
  std::set<std::size_t> s(a.begin(), a.end());
  for (auto i : b) {
    if (s.count(i)) throw IntegrityError(std::string("split leak: ") + what + " share graph " + std::to_string(i));
  }
}

struct Task {
  bool regression = false;
  std::size_t n_classes = 0;
};

MLPTargets targets_of(const Dataset& ds, const Task& t) {
  if (t.regression) {
    Matrix y(ds.graphs.size(), ds.target_dim);
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
      const auto& v = ds.graphs[g].y.values;
      std::copy(v.begin(), v.end(), y.row(g).begin());
    }
    return MLPTargets::regression(std::move(y));
  }
  std::vector<std::uint32_t> labels;
  for (const auto& g : ds.graphs) labels.push_back(static_cast<std::uint32_t>(*g.y.label));
  return MLPTargets::classes(std::move(labels), t.n_classes);
}

MLPConfig with_task_loss(MLPConfig c, const Task& t, std::uint64_t fold) {
  c.loss = t.regression ? Loss::mean_absolute_error : Loss::cross_entropy;
  c.seed = derive_seed(c.seed, fold, 0x3c9);
  return c;
}

// Trains the stack on `fit`, infers `other`, and returns embeddings for both.
struct Embedded {
  FrozenStates fit, other;
  GraphBatch fit_batch, other_batch;
};

Embedded embed_pair(const Dataset& fit, const Dataset& other, const StackConfig& cfg, Execution exec) {
  Embedded e;
  e.fit_batch = GraphBatch::from(fit);
  e.other_batch = GraphBatch::from(other);
  auto trained = train_stack(fit, cfg, exec);
  e.fit = std::move(trained.states);
  e.other = infer_stack(trained.model, e.other_batch, exec);
  return e;
}

EvalReport evaluate(const Dataset& ds, const SelectionGrid& grid, const EvalOptions& opts, const Task& task) {
  const auto t0 = std::chrono::steady_clock::now();
  ds.validate();
  if (grid.size() == 0) throw ConfigError("selection grid is empty");
  if (!(opts.inner_val_fraction > 0.0 && opts.inner_val_fraction < 1.0)) {
    throw ConfigError("inner_val_fraction must be in (0, 1)");
  }
  const std::size_t n = ds.graphs.size();
  const MLPTargets y_all = targets_of(ds, task);
  const auto folds = kfold_test_sets(n, opts.folds, opts.seed, task.regression ? std::span<const std::uint32_t>{} : std::span<const std::uint32_t>(y_all.labels));

  EvalReport report;
  report.task = task.regression ? "regression" : "classification";
  report.metric = task.regression ? "mae" : "accuracy";
  report.config = {{"folds", opts.folds},
                   {"inner_val_fraction", opts.inner_val_fraction},
                   {"seed", opts.seed},
                   {"edge_bins", opts.edge_bins},
                   {"grid", to_json(grid)}};

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& test = folds[f];
    std::vector<std::size_t> outer;
    {
      std::set<std::size_t> t(test.begin(), test.end());
      for (std::size_t i = 0; i < n; ++i) {
        if (!t.count(i)) outer.push_back(i);
      }
    }
    Dataset binned;
    if (opts.edge_bins > 0) binned = discretize_edges(ds, opts.edge_bins, outer);
    const Dataset& src = opts.edge_bins > 0 ? binned : ds;
    std::vector<std::size_t> shuffled = outer;
    Rng rng(derive_seed(opts.seed, f, 0x1a7));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto n_val = static_cast<std::size_t>(std::round(opts.inner_val_fraction * static_cast<double>(outer.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, outer.size() - 1);
    std::vector<std::size_t> val(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val), shuffled.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    assert_disjoint(train, val, "inner train and validation");
    assert_disjoint(test, train, "test and inner train");
    assert_disjoint(test, val, "test and validation");

    const Dataset ds_train = src.subset(train), ds_val = src.subset(val);
    const MLPTargets y_train = y_all.subset(train), y_val = y_all.subset(val);

    double best = -std::numeric_limits<double>::infinity();
    GridChoice choice;
    for (std::size_t s = 0; s < grid.stacks.size(); ++s) {
      const auto emb = embed_pair(ds_train, ds_val, grid.stacks[s], opts.exec);
      for (std::size_t e = 0; e < grid.embeddings.size(); ++e) {
        const Matrix x_tr = graph_embedding(emb.fit, grid.embeddings[e], emb.fit_batch);
        const Matrix x_va = graph_embedding(emb.other, grid.embeddings[e], emb.other_batch);
        for (std::size_t m = 0; m < grid.mlps.size(); ++m) {
          const auto cfg = with_task_loss(grid.mlps[m], task, f);
          const auto p = train_mlp(x_tr, y_train, x_va, y_val, cfg);
          const double score = p.history.best_val_score;
          log_debug("fold {} stack {} embedding {} mlp {}: validation {:.6g}", f, s, e, m, score);
          if (score > best) {
            best = score;
            choice = {s, e, m};
          }
        }
      }
    }

    // Refit the selected stack on the whole training fold; the MLP keeps the
    // inner split for early stopping.
    std::vector<std::size_t> fit_idx = outer;
    assert_disjoint(test, fit_idx, "test and refit");
    const Dataset ds_outer = src.subset(fit_idx), ds_test = src.subset(test);
    const auto emb = embed_pair(ds_outer, ds_test, grid.stacks[choice.stack], opts.exec);
    const Matrix x_outer = graph_embedding(emb.fit, grid.embeddings[choice.embedding], emb.fit_batch);
    const Matrix x_test = graph_embedding(emb.other, grid.embeddings[choice.embedding], emb.other_batch);
    std::vector<std::size_t> pos_train, pos_val;
    for (std::size_t i = 0, t = 0, v = 0; i < fit_idx.size(); ++i) {
      if (t < train.size() && train[t] == fit_idx[i]) {
        pos_train.push_back(i);
        ++t;
      } else if (v < val.size() && val[v] == fit_idx[i]) {
        pos_val.push_back(i);
        ++v;
      }
    }
    const auto cfg = with_task_loss(grid.mlps[choice.mlp], task, f);
    const auto p = train_mlp(select_rows(x_outer, pos_train), y_train, select_rows(x_outer, pos_val), y_val, cfg);
    const MLPTargets y_test = y_all.subset(test);
    FoldResult r;
    r.fold = f;
    r.val_score = best;
    r.chosen = choice;
    r.n_train = train.size();
    r.n_val = val.size();
    r.n_test = test.size();
    const double s = p.score(x_test, y_test);
    r.test_score = task.regression ? -s : s;
    log_info("fold {}: test {} {:.6g}", f, report.metric, r.test_score);
    report.folds.push_back(r);
  }

  double sum = 0.0;
  for (const auto& r : report.folds) sum += r.test_score;
  report.mean = sum / static_cast<double>(report.folds.size());
  double ss = 0.0;
  for (const auto& r : report.folds) ss += (r.test_score - report.mean) * (r.test_score - report.mean);
  report.stddev = std::sqrt(ss / static_cast<double>(report.folds.size()));
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

EvalReport evaluate_classification(const Dataset& ds, const SelectionGrid& grid, const EvalOptions& opts) {
  if (ds.target_kind != TargetKind::classification || ds.n_classes == 0) {
    throw ConfigError("classification needs a dataset with class labels");
  }
  return evaluate(ds, grid, opts, Task{false, ds.n_classes});
}

EvalReport evaluate_regression(const Dataset& ds, const SelectionGrid& grid, const EvalOptions& opts) {
  if (ds.target_kind != TargetKind::regression || ds.target_dim == 0) {
    throw ConfigError("regression needs a dataset with real targets");
  }
  return evaluate(ds, grid, opts, Task{true, 0});
}

}  // namespace ecgmm
