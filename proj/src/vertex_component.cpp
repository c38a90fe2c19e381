#include "ecgmm/vertex_component.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecgmm/error.hpp"

namespace ecgmm {

void VertexLayerParams::validate() const {
  if (emission.states() != c_v) throw ShapeError("vertex emission states differ from C_V");
  if (transition.groups != c_e || transition.targets != c_v || transition.sources != c_v) {
    throw ShapeError("vertex transition must be C_E x C_V x C_V");
  }
  if (sp.weights.size() != c_e) throw ShapeError("vertex SP prior must have C_E weights");
  if (mixture.size() != c_v) throw ShapeError("vertex mixture prior must have C_V weights");
  emission.validate();
  transition.validate();
  sp.validate();
  SPPrior{mixture}.validate();
}

std::uint32_t argmax_state(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return static_cast<std::uint32_t>(best);
}

namespace {

void check_prev(const GraphBatch& batch, const VertexLayerParams& p, const PrevStates& prev) {
  if (prev.empty()) return;
  if (prev.edge == nullptr) throw ShapeError("previous vertex states given without edge states");
  if (prev.vertex->rows != batch.n_vertices || prev.vertex->cols != p.c_v) {
    throw ShapeError("previous vertex states must be " + std::to_string(batch.n_vertices) + " x " +
                     std::to_string(p.c_v));
  }
  if (prev.edge->rows != batch.n_edges() || prev.edge->cols != p.c_e) {
    throw ShapeError("previous edge states must be " + std::to_string(batch.n_edges()) + " x " +
                     std::to_string(p.c_e));
  }
}

// Scratch buffers for scoring one vertex.
struct Workspace {
  std::vector<double> log_em, weight, ctx, mass, sp_eff, resp;
  Workspace(std::size_t c_v, std::size_t c_e)
      : log_em(c_v), weight(c_v), ctx(c_e * c_v), mass(c_e), sp_eff(c_e), resp(c_v) {}
};

// Fills ws.ctx/ws.mass for vertex u; returns false when every group is empty.
bool gather_context(const NeighborhoodIndex& idx, const Matrix& prev_v, const Matrix& prev_e,
                    std::size_t u, std::size_t c_v, std::size_t c_e, Workspace& ws) {
  std::fill(ws.ctx.begin(), ws.ctx.end(), 0.0);
  std::fill(ws.mass.begin(), ws.mass.end(), 0.0);
  const auto edges = idx.incoming_edges(u);
  const auto sources = idx.neighbors(u);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto qe = prev_e.row(edges[k]);
    const auto qv = prev_v.row(sources[k]);
    for (std::size_t a = 0; a < c_e; ++a) {
      const double w = qe[a];
      if (w == 0.0) continue;
      ws.mass[a] += w;
      double* dst = ws.ctx.data() + a * c_v;
      for (std::size_t j = 0; j < c_v; ++j) dst[j] += w * qv[j];
    }
  }
  bool any = false;
  for (std::size_t a = 0; a < c_e; ++a) {
    if (ws.mass[a] > 0.0) {
      any = true;
      const double inv = 1.0 / ws.mass[a];
      for (std::size_t j = 0; j < c_v; ++j) ws.ctx[a * c_v + j] *= inv;
    }
  }
  return any;
}

// Scores vertex u: writes its posterior over Q_u into `post`, accumulates
// expected statistics into `stats` when given, and returns log P(x_u | context).
double score_vertex(const GraphBatch& batch, const VertexLayerParams& p, const PrevStates& prev,
                    std::size_t u, Workspace& ws, std::span<double> post, SuffStats* stats,
                    std::vector<double>* full_resp = nullptr, bool* used_mixture = nullptr) {
  const auto c_v = p.c_v;
  const auto c_e = p.c_e;
  p.emission.log_densities(batch.x, u, ws.log_em);
  const double top = *std::max_element(ws.log_em.begin(), ws.log_em.end());
  if (!std::isfinite(top)) {
    throw NumericError("vertex " + std::to_string(u) + ": non-finite emission density");
  }
  for (std::size_t i = 0; i < c_v; ++i) ws.weight[i] = std::exp(ws.log_em[i] - top);

  const bool has_context =
      !prev.empty() && gather_context(batch.index, *prev.vertex, *prev.edge, u, c_v, c_e, ws);

  if (used_mixture != nullptr) *used_mixture = !has_context;
  if (!has_context) {
    double z = 0.0;
    for (std::size_t i = 0; i < c_v; ++i) {
      ws.resp[i] = ws.weight[i] * p.mixture[i];
      z += ws.resp[i];
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw NumericError("vertex " + std::to_string(u) + ": degenerate normalization");
    }
    for (std::size_t i = 0; i < c_v; ++i) {
      ws.resp[i] /= z;
      post[i] = ws.resp[i];
    }
    if (stats != nullptr) {
      stats->emission.add(batch.x, u, ws.resp);
      for (std::size_t i = 0; i < c_v; ++i) stats->mixture[i] += ws.resp[i];
      ++stats->items;
    }
    if (full_resp != nullptr) full_resp->assign(ws.resp.begin(), ws.resp.end());
    return top + std::log(z);
  }

  // switching-parent weights renormalized over groups that carry mass
  double sp_total = 0.0;
  for (std::size_t a = 0; a < c_e; ++a) {
    ws.sp_eff[a] = ws.mass[a] > 0.0 ? p.sp.weights[a] : 0.0;
    sp_total += ws.sp_eff[a];
  }
  for (auto& w : ws.sp_eff) w /= sp_total;

  double z = 0.0;
  for (std::size_t i = 0; i < c_v; ++i) {
    double prior = 0.0;
    for (std::size_t a = 0; a < c_e; ++a) {
      if (ws.sp_eff[a] == 0.0) continue;
      const double* t = p.transition.probs.data() + (a * c_v + i) * c_v;
      const double* c = ws.ctx.data() + a * c_v;
      double s = 0.0;
      for (std::size_t j = 0; j < c_v; ++j) s += t[j] * c[j];
      prior += ws.sp_eff[a] * s;
    }
    ws.resp[i] = ws.weight[i] * prior;
    z += ws.resp[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericError("vertex " + std::to_string(u) + ": degenerate normalization");
  }
  const double inv_z = 1.0 / z;
  for (std::size_t i = 0; i < c_v; ++i) {
    ws.resp[i] *= inv_z;
    post[i] = ws.resp[i];
  }

  if (full_resp != nullptr) full_resp->assign(c_v * c_e * c_v, 0.0);
  if (stats != nullptr || full_resp != nullptr) {
    for (std::size_t i = 0; i < c_v; ++i) {
      const double wi = ws.weight[i] * inv_z;
      for (std::size_t a = 0; a < c_e; ++a) {
        if (ws.sp_eff[a] == 0.0) continue;
        const double wia = wi * ws.sp_eff[a];
        const double* t = p.transition.probs.data() + (a * c_v + i) * c_v;
        const double* c = ws.ctx.data() + a * c_v;
        double group = 0.0;
        for (std::size_t j = 0; j < c_v; ++j) {
          const double r = wia * t[j] * c[j];
          group += r;
          if (stats != nullptr) stats->transition[(a * c_v + i) * c_v + j] += r;
          if (full_resp != nullptr) (*full_resp)[(i * c_e + a) * c_v + j] = r;
        }
        if (stats != nullptr) stats->sp[a] += group;
      }
    }
  }
  if (stats != nullptr) {
    stats->emission.add(batch.x, u, ws.resp);
    for (std::size_t a = 0; a < c_e; ++a) {
      if (ws.mass[a] > 0.0) stats->sp_exposure[a] += 1.0 / sp_total;
    }
    ++stats->items;
  }
  return top + std::log(z);
}

SuffStats empty_stats(const VertexLayerParams& p) {
  return SuffStats::zeros(p.emission.kind(), p.emission.width(), p.c_e, p.c_v, p.c_v);
}

struct LogLik {
  double value = 0.0;
  void merge(const LogLik& o) { value += o.value; }
};

}  // namespace

VertexContext compute_vertex_context(const NeighborhoodIndex& idx, const Matrix& prev_vertex,
                                     const Matrix& prev_edge) {
  const auto n = idx.n_vertices();
  const auto c_v = prev_vertex.cols;
  const auto c_e = prev_edge.cols;
  if (prev_vertex.rows != n) throw ShapeError("vertex posteriors do not match the graph");
  if (prev_edge.rows != idx.edge_ids.size()) throw ShapeError("edge posteriors do not match the graph");
  VertexContext out{c_e, c_v, Matrix(n, c_e * c_v), Matrix(n, c_e)};
  Workspace ws(c_v, c_e);
  for (std::size_t u = 0; u < n; ++u) {
    gather_context(idx, prev_vertex, prev_edge, u, c_v, c_e, ws);
    std::copy(ws.ctx.begin(), ws.ctx.end(), out.ctx.row(u).begin());
    std::copy(ws.mass.begin(), ws.mass.end(), out.mass.row(u).begin());
  }
  return out;
}

VertexContext compute_vertex_context(const Graph& g, const NeighborhoodIndex& idx,
                                     const Matrix& prev_vertex, const Matrix& prev_edge) {
  if (g.n_vertices != idx.n_vertices() || g.edges.size() != idx.edge_ids.size()) {
    throw ShapeError("neighborhood index does not belong to the graph");
  }
  return compute_vertex_context(idx, prev_vertex, prev_edge);
}

std::vector<double> vertex_prior(const VertexContext& ctx, const VertexLayerParams& p,
                                 std::size_t u) {
  const auto c_v = p.c_v;
  const auto c_e = p.c_e;
  if (ctx.c_v != c_v || ctx.c_e != c_e) throw ShapeError("context shape differs from parameters");
  const auto mass = ctx.mass.row(u);
  const auto c = ctx.ctx.row(u);
  double sp_total = 0.0;
  for (std::size_t a = 0; a < c_e; ++a) {
    if (mass[a] > 0.0) sp_total += p.sp.weights[a];
  }
  if (sp_total == 0.0) return p.mixture;
  std::vector<double> prior(c_v, 0.0);
  for (std::size_t a = 0; a < c_e; ++a) {
    if (!(mass[a] > 0.0)) continue;
    const double w = p.sp.weights[a] / sp_total;
    for (std::size_t i = 0; i < c_v; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c_v; ++j) s += p.transition(a, i, j) * c[a * c_v + j];
      prior[i] += w * s;
    }
  }
  return prior;
}

EStepResult vertex_e_step(const GraphBatch& batch, const VertexLayerParams& params,
                          const PrevStates& prev, Execution exec) {
  params.emission.check_compatible(batch.x);
  check_prev(batch, params, prev);
  EStepResult out;
  out.posteriors = Matrix(batch.n_vertices, params.c_v);
  if (exec == Execution::serial) {
    out.stats = empty_stats(params);
    Workspace ws(params.c_v, params.c_e);
    for (std::size_t u = 0; u < batch.n_vertices; ++u) {
      out.stats.log_likelihood +=
          score_vertex(batch, params, prev, u, ws, out.posteriors.row(u), &out.stats);
    }
  } else {
    out.stats = block_reduce<SuffStats>(
        batch.n_vertices, [&] { return empty_stats(params); },
        [&](std::size_t begin, std::size_t end, SuffStats& acc) {
          Workspace ws(params.c_v, params.c_e);
          for (std::size_t u = begin; u < end; ++u) {
            acc.log_likelihood +=
                score_vertex(batch, params, prev, u, ws, out.posteriors.row(u), &acc);
          }
        });
  }
  out.log_likelihood = out.stats.log_likelihood;
  return out;
}

VertexLayerParams vertex_m_step(const SuffStats& stats, const VertexLayerParams& prev) {
  if (stats.items == 0) throw StateError("vertex M-step called without any E-step statistics");
  VertexLayerParams next = prev;
  next.emission = emission_m_step(stats.emission, prev.emission);
  next.transition = transition_m_step(stats, prev.transition);
  next.sp = sp_m_step(stats, prev.sp);
  next.mixture = mixture_m_step(stats, prev.mixture);
  return next;
}

InferResult vertex_infer(const GraphBatch& batch, const VertexLayerParams& params,
                         const PrevStates& prev, Execution exec) {
  params.emission.check_compatible(batch.x);
  check_prev(batch, params, prev);
  InferResult out;
  out.posteriors = Matrix(batch.n_vertices, params.c_v);
  out.states.resize(batch.n_vertices);
  auto body = [&](std::size_t begin, std::size_t end, LogLik& acc) {
    Workspace ws(params.c_v, params.c_e);
    for (std::size_t u = begin; u < end; ++u) {
      acc.value += score_vertex(batch, params, prev, u, ws, out.posteriors.row(u), nullptr);
      out.states[u] = argmax_state(out.posteriors.row(u));
    }
  };
  LogLik ll;
  if (exec == Execution::serial) {
    body(0, batch.n_vertices, ll);
  } else {
    ll = block_reduce<LogLik>(batch.n_vertices, [] { return LogLik{}; }, body);
  }
  out.log_likelihood = ll.value;
  return out;
}

VertexResponsibilities vertex_responsibilities(const GraphBatch& batch,
                                               const VertexLayerParams& params,
                                               const PrevStates& prev, std::size_t u) {
  check_prev(batch, params, prev);
  if (u >= batch.n_vertices) throw InputError("vertex id out of range");
  Workspace ws(params.c_v, params.c_e);
  std::vector<double> post(params.c_v);
  VertexResponsibilities out;
  score_vertex(batch, params, prev, u, ws, post, nullptr, &out.values, &out.uses_mixture);
  return out;
}

VertexLayerParams init_vertex_params(Rng& rng, const Features& x, std::size_t domain,
                                     std::size_t c_v, std::size_t c_e) {
  VertexLayerParams p;
  p.c_v = c_v;
  p.c_e = c_e;
  p.emission = random_emission(rng, x, c_v, domain);
  p.transition = TransitionTensor::random(rng, c_e, c_v, c_v);
  p.sp = SPPrior{simplex_project(dirichlet_uniform(rng, c_e))};
  p.mixture = simplex_project(dirichlet_uniform(rng, c_v));
  return p;
}

}  // namespace ecgmm
