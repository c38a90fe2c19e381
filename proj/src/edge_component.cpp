#include "ecgmm/edge_component.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecgmm/error.hpp"

namespace ecgmm {

void EdgeLayerParams::validate() const {
  if (emission.states() != c_e) throw ShapeError("edge emission states differ from C_E");
  if (transition.groups != 2 || transition.targets != c_e || transition.sources != c_v) {
    throw ShapeError("edge transition must be 2 x C_E x C_V");
  }
  if (sp.weights.size() != 2) throw ShapeError("edge SP prior must have 2 weights");
  emission.validate();
  transition.validate();
  sp.validate();
}

std::vector<double> edge_prior(const EdgeLayerParams& p, std::span<const double> q_src,
                               std::span<const double> q_dst) {
  if (q_src.size() != p.c_v || q_dst.size() != p.c_v) {
    throw ShapeError("endpoint posteriors must have C_V = " + std::to_string(p.c_v) + " entries");
  }
  std::vector<double> prior(p.c_e, 0.0);
  for (std::size_t i = 0; i < p.c_e; ++i) {
    double s = 0.0, d = 0.0;
    for (std::size_t j = 0; j < p.c_v; ++j) {
      s += p.transition(kSourceGroup, i, j) * q_src[j];
      d += p.transition(kDestinationGroup, i, j) * q_dst[j];
    }
    prior[i] = p.sp.weights[kSourceGroup] * s + p.sp.weights[kDestinationGroup] * d;
  }
  return prior;
}

namespace {

struct Workspace {
  std::vector<double> log_em, weight, resp, uniform;
  Workspace(std::size_t c_e, std::size_t c_v)
      : log_em(c_e), weight(c_e), resp(c_e), uniform(c_v, 1.0 / static_cast<double>(c_v)) {}
};

double score_edge(const GraphBatch& batch, const EdgeLayerParams& p, const Matrix* prev,
                  std::size_t e, Workspace& ws, std::span<double> post, SuffStats* stats,
                  std::vector<double>* full_resp = nullptr) {
  const auto c_e = p.c_e;
  const auto c_v = p.c_v;
  p.emission.log_densities(batch.a, e, ws.log_em);
  const double top = *std::max_element(ws.log_em.begin(), ws.log_em.end());
  if (!std::isfinite(top)) {
    throw NumericError("edge " + std::to_string(e) + ": non-finite emission density");
  }
  for (std::size_t i = 0; i < c_e; ++i) ws.weight[i] = std::exp(ws.log_em[i] - top);

  const std::span<const double> q[2] = {
      prev ? prev->row(batch.edges[e].src) : std::span<const double>(ws.uniform),
      prev ? prev->row(batch.edges[e].dst) : std::span<const double>(ws.uniform)};
  const double sp_total = p.sp.weights[0] + p.sp.weights[1];
  const double sp[2] = {p.sp.weights[0] / sp_total, p.sp.weights[1] / sp_total};

  double z = 0.0;
  for (std::size_t i = 0; i < c_e; ++i) {
    double prior = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
      const double* t = p.transition.probs.data() + (a * c_e + i) * c_v;
      double s = 0.0;
      for (std::size_t j = 0; j < c_v; ++j) s += t[j] * q[a][j];
      prior += sp[a] * s;
    }
    ws.resp[i] = ws.weight[i] * prior;
    z += ws.resp[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericError("edge " + std::to_string(e) + ": degenerate normalization");
  }
  const double inv_z = 1.0 / z;
  for (std::size_t i = 0; i < c_e; ++i) {
    ws.resp[i] *= inv_z;
    post[i] = ws.resp[i];
  }

  if (full_resp != nullptr) full_resp->assign(c_e * 2 * c_v, 0.0);
  if (stats != nullptr || full_resp != nullptr) {
    for (std::size_t i = 0; i < c_e; ++i) {
      const double wi = ws.weight[i] * inv_z;
      for (std::size_t a = 0; a < 2; ++a) {
        const double wia = wi * sp[a];
        const double* t = p.transition.probs.data() + (a * c_e + i) * c_v;
        double group = 0.0;
        for (std::size_t j = 0; j < c_v; ++j) {
          const double r = wia * t[j] * q[a][j];
          group += r;
          if (stats != nullptr) stats->transition[(a * c_e + i) * c_v + j] += r;
          if (full_resp != nullptr) (*full_resp)[(i * 2 + a) * c_v + j] = r;
        }
        if (stats != nullptr) stats->sp[a] += group;
      }
    }
  }
  if (stats != nullptr) {
    stats->emission.add(batch.a, e, ws.resp);
    stats->sp_exposure[0] += 1.0 / sp_total;
    stats->sp_exposure[1] += 1.0 / sp_total;
    ++stats->items;
  }
  return top + std::log(z);
}

void check_inputs(const GraphBatch& batch, const EdgeLayerParams& p, const Matrix* prev) {
  p.emission.check_compatible(batch.a);
  if (prev != nullptr && (prev->rows != batch.n_vertices || prev->cols != p.c_v)) {
    throw ShapeError("previous vertex states must be " + std::to_string(batch.n_vertices) + " x " +
                     std::to_string(p.c_v));
  }
}

SuffStats empty_stats(const EdgeLayerParams& p) {
  return SuffStats::zeros(p.emission.kind(), p.emission.width(), 2, p.c_e, p.c_v);
}

struct LogLik {
  double value = 0.0;
  void merge(const LogLik& o) { value += o.value; }
};

}  // namespace

EStepResult edge_e_step(const GraphBatch& batch, const EdgeLayerParams& params,
                        const Matrix* prev_vertex, Execution exec) {
  check_inputs(batch, params, prev_vertex);
  EStepResult out;
  out.posteriors = Matrix(batch.n_edges(), params.c_e);
  if (exec == Execution::serial) {
    out.stats = empty_stats(params);
    Workspace ws(params.c_e, params.c_v);
    for (std::size_t e = 0; e < batch.n_edges(); ++e) {
      out.stats.log_likelihood +=
          score_edge(batch, params, prev_vertex, e, ws, out.posteriors.row(e), &out.stats);
    }
  } else {
    out.stats = block_reduce<SuffStats>(
        batch.n_edges(), [&] { return empty_stats(params); },
        [&](std::size_t begin, std::size_t end, SuffStats& acc) {
          Workspace ws(params.c_e, params.c_v);
          for (std::size_t e = begin; e < end; ++e) {
            acc.log_likelihood +=
                score_edge(batch, params, prev_vertex, e, ws, out.posteriors.row(e), &acc);
          }
        });
  }
  out.log_likelihood = out.stats.log_likelihood;
  return out;
}

EdgeLayerParams edge_m_step(const SuffStats& stats, const EdgeLayerParams& prev) {
  if (stats.items == 0) throw StateError("edge M-step called without any E-step statistics");
  EdgeLayerParams next = prev;
  next.emission = emission_m_step(stats.emission, prev.emission);
  next.transition = transition_m_step(stats, prev.transition);
  next.sp = sp_m_step(stats, prev.sp);
  return next;
}

InferResult edge_infer(const GraphBatch& batch, const EdgeLayerParams& params,
                       const Matrix* prev_vertex, Execution exec) {
  check_inputs(batch, params, prev_vertex);
  InferResult out;
  out.posteriors = Matrix(batch.n_edges(), params.c_e);
  out.states.resize(batch.n_edges());
  auto body = [&](std::size_t begin, std::size_t end, LogLik& acc) {
    Workspace ws(params.c_e, params.c_v);
    for (std::size_t e = begin; e < end; ++e) {
      acc.value += score_edge(batch, params, prev_vertex, e, ws, out.posteriors.row(e), nullptr);
      out.states[e] = argmax_state(out.posteriors.row(e));
    }
  };
  LogLik ll;
  if (exec == Execution::serial) {
    body(0, batch.n_edges(), ll);
  } else {
    ll = block_reduce<LogLik>(batch.n_edges(), [] { return LogLik{}; }, body);
  }
  out.log_likelihood = ll.value;
  return out;
}

std::vector<double> edge_responsibilities(const GraphBatch& batch, const EdgeLayerParams& params,
                                          const Matrix* prev_vertex, std::size_t e) {
  check_inputs(batch, params, prev_vertex);
  if (e >= batch.n_edges()) throw InputError("edge id out of range");
  Workspace ws(params.c_e, params.c_v);
  std::vector<double> post(params.c_e), full;
  score_edge(batch, params, prev_vertex, e, ws, post, nullptr, &full);
  return full;
}

EdgeLayerParams init_edge_params(Rng& rng, const Features& a, std::size_t domain, std::size_t c_e,
                                 std::size_t c_v) {
  EdgeLayerParams p;
  p.c_e = c_e;
  p.c_v = c_v;
  p.emission = random_emission(rng, a, c_e, domain);
  p.transition = TransitionTensor::random(rng, 2, c_e, c_v);
  p.sp = SPPrior{simplex_project(dirichlet_uniform(rng, 2))};
  return p;
}

}  // namespace ecgmm
