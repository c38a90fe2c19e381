#include "ecgmm/stack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecgmm/error.hpp"
#include "ecgmm/log.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

std::string to_string(StateMode mode) {
  return mode == StateMode::discrete ? "discrete" : "continuous";
}

StateMode state_mode_from_string(const std::string& s) {
  if (s == "discrete") return StateMode::discrete;
  if (s == "continuous") return StateMode::continuous;
  throw ConfigError("state_mode must be 'discrete' or 'continuous', got '" + s + "'");
}

void StackConfig::validate() const {
  if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
  if (c_v < 1 || c_e < 1) throw ConfigError("c_v and c_e must be >= 1");
  if (em_iterations < 1) throw ConfigError("em_iterations must be >= 1");
  if (!(em_rel_tolerance >= 0.0)) throw ConfigError("em_rel_tolerance must be >= 0");
}

std::uint64_t component_seed(std::uint64_t seed, std::size_t layer, std::size_t component) {
  return derive_seed(seed, layer, component);
}

Matrix freeze(const Matrix& posteriors, StateMode mode) {
  if (mode == StateMode::continuous) return posteriors;
  Matrix out(posteriors.rows, posteriors.cols);
  for (std::size_t r = 0; r < posteriors.rows; ++r) out(r, argmax_state(posteriors.row(r))) = 1.0;
  return out;
}

namespace {

std::size_t categorical_domain(const Features& f, std::size_t declared) {
  std::size_t k = declared;
  for (auto id : f.labels) k = std::max<std::size_t>(k, id + 1);
  return std::max<std::size_t>(k, 1);
}

void resolve_one(FeatureKind& kind, std::size_t& width, const Features& f, std::size_t domain,
                 const char* what) {
  const std::size_t w = f.kind == FeatureKind::categorical ? categorical_domain(f, domain) : f.dim;
  if (kind == FeatureKind::none) {
    kind = f.kind;
    width = w;
    return;
  }
  if (kind != f.kind) {
    throw ConfigError(std::string(what) + " features are " + to_string(f.kind) +
                      " but the model expects " + to_string(kind));
  }
  if (f.kind == FeatureKind::continuous && width != w) {
    throw ConfigError(std::string(what) + " feature width " + std::to_string(w) +
                      " differs from the model's " + std::to_string(width));
  }
  if (f.kind == FeatureKind::categorical && w > width) {
    throw ConfigError(std::string(what) + " categories exceed the model's domain of " +
                      std::to_string(width));
  }
}

// EM for one component; appends its likelihood trace to `log`.
template <class Params, class EStep, class MStep>
Params run_em(Params params, const StackConfig& cfg, std::size_t layer, const char* component,
              std::vector<TraceEntry>& log, EStep estep, MStep mstep) {
  double previous = 0.0;
  for (std::size_t it = 0; it < cfg.em_iterations; ++it) {
    EStepResult r = estep(params);
    log.push_back({layer, component, it, r.log_likelihood});
    if (it > 0 && cfg.em_rel_tolerance > 0.0 &&
        r.log_likelihood - previous <= cfg.em_rel_tolerance * std::abs(previous)) {
      log_debug("layer {} {}: converged after {} iterations", layer, component, it + 1);
      return params;
    }
    previous = r.log_likelihood;
    if (r.stats.items == 0) return params;  // nothing to fit (e.g. edgeless data)
    params = mstep(r.stats, params);
  }
  return params;
}

}  // namespace

StackConfig resolve_emissions(const StackConfig& cfg, const GraphBatch& batch,
                              std::size_t vertex_domain, std::size_t edge_domain) {
  StackConfig out = cfg;
  resolve_one(out.vertex_kind, out.vertex_width, batch.x, vertex_domain, "vertex");
  resolve_one(out.edge_kind, out.edge_width, batch.a, edge_domain, "edge");
  return out;
}

TrainResult train_stack(const GraphBatch& batch, const StackConfig& cfg_in, Execution exec,
                        const LayerObserver& observer) {
  cfg_in.validate();
  const StackConfig cfg = resolve_emissions(cfg_in, batch, cfg_in.vertex_width, cfg_in.edge_width);
  TrainResult out;
  out.model.config = cfg;
  out.states.mode = cfg.state_mode;

  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    PrevStates prev;
    if (layer > 0) prev = {&out.states.vertex[layer - 1], &out.states.edge[layer - 1]};

    Rng vrng(component_seed(cfg.seed, layer, 0));
    auto vparams = init_vertex_params(vrng, batch.x, cfg.vertex_width, cfg.c_v, cfg.c_e);
    vparams = run_em(
        std::move(vparams), cfg, layer, "vertex", out.model.training_log,
        [&](const VertexLayerParams& p) { return vertex_e_step(batch, p, prev, exec); },
        [](const SuffStats& s, const VertexLayerParams& p) { return vertex_m_step(s, p); });

    Rng erng(component_seed(cfg.seed, layer, 1));
    auto eparams = init_edge_params(erng, batch.a, cfg.edge_width, cfg.c_e, cfg.c_v);
    eparams = run_em(
        std::move(eparams), cfg, layer, "edge", out.model.training_log,
        [&](const EdgeLayerParams& p) { return edge_e_step(batch, p, prev.vertex, exec); },
        [](const SuffStats& s, const EdgeLayerParams& p) { return edge_m_step(s, p); });

    auto vinf = vertex_infer(batch, vparams, prev, exec);
    auto einf = edge_infer(batch, eparams, prev.vertex, exec);
    log_info("layer {}: vertex log-likelihood {:.6g}, edge log-likelihood {:.6g}", layer,
             vinf.log_likelihood, einf.log_likelihood);
    out.model.layers.push_back({std::move(vparams), std::move(eparams)});
    out.states.vertex.push_back(freeze(vinf.posteriors, cfg.state_mode));
    out.states.edge.push_back(freeze(einf.posteriors, cfg.state_mode));
    if (observer) observer(layer, out.model, out.states);
  }
  return out;
}

TrainResult train_stack(const Dataset& ds, const StackConfig& cfg, Execution exec,
                        const LayerObserver& observer) {
  ds.validate();
  StackConfig c = cfg;
  if (c.vertex_kind == FeatureKind::none && ds.vertex_meta.kind == FeatureKind::categorical) {
    c.vertex_width = ds.vertex_meta.domain;
  }
  if (c.edge_kind == FeatureKind::none && ds.edge_meta.kind == FeatureKind::categorical) {
    c.edge_width = ds.edge_meta.domain;
  }
  return train_stack(GraphBatch::from(ds), c, exec, observer);
}

FrozenStates infer_stack(const StackModel& model, const GraphBatch& batch, Execution exec) {
  const auto& cfg = model.config;
  // throws ConfigError on a kind mismatch
  resolve_emissions(cfg, batch, cfg.vertex_width, cfg.edge_width);
  if (model.layers.size() != cfg.n_layers) throw ConfigError("model layer count differs from config");
  FrozenStates fs;
  fs.mode = cfg.state_mode;
  for (std::size_t layer = 0; layer < model.layers.size(); ++layer) {
    PrevStates prev;
    if (layer > 0) prev = {&fs.vertex[layer - 1], &fs.edge[layer - 1]};
    auto vinf = vertex_infer(batch, model.layers[layer].vertex, prev, exec);
    auto einf = edge_infer(batch, model.layers[layer].edge, prev.vertex, exec);
    fs.vertex.push_back(freeze(vinf.posteriors, cfg.state_mode));
    fs.edge.push_back(freeze(einf.posteriors, cfg.state_mode));
  }
  return fs;
}

FrozenStates infer_stack(const StackModel& model, const Dataset& ds, Execution exec) {
  ds.validate();
  return infer_stack(model, GraphBatch::from(ds), exec);
}

std::vector<std::vector<std::size_t>> edge_state_histogram(const FrozenStates& fs) {
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& layer : fs.edge) {
    std::vector<std::size_t> row(layer.cols, 0);
    for (std::size_t e = 0; e < layer.rows; ++e) ++row[argmax_state(layer.row(e))];
    counts.push_back(std::move(row));
  }
  return counts;
}

}  // namespace ecgmm
