#include "ecgmm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ecgmm/error.hpp"

namespace ecgmm {

std::vector<double> simplex_project(std::span<const double> v, double floor) {
  const std::size_t n = v.size();
  std::vector<double> out(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  if (n == 0) return out;
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValueError("simplex_project: entries must be finite and non-negative");
    }
    total += x;
  }
  if (total <= 0.0) return out;

  std::vector<bool> pinned(n, false);
  while (true) {
    double free_mass = 1.0;
    double free_total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (pinned[k]) {
        free_mass -= floor;
      } else {
        free_total += v[k];
      }
    }
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (pinned[k]) {
        out[k] = floor;
        continue;
      }
      out[k] = free_total > 0.0 ? v[k] / free_total * free_mass : free_mass;
      if (out[k] < floor) {
        pinned[k] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

// ---------------------------------------------------------------------------

Emission::Emission(CategoricalEmission c) : repr_(std::move(c)) { validate(); }
Emission::Emission(GaussianEmission g) : repr_(std::move(g)) { validate(); }

FeatureKind Emission::kind() const {
  if (std::holds_alternative<CategoricalEmission>(repr_)) return FeatureKind::categorical;
  if (std::holds_alternative<GaussianEmission>(repr_)) return FeatureKind::continuous;
  return FeatureKind::none;
}

std::size_t Emission::states() const {
  if (const auto* c = std::get_if<CategoricalEmission>(&repr_)) return c->states;
  if (const auto* g = std::get_if<GaussianEmission>(&repr_)) return g->states;
  return 0;
}

std::size_t Emission::width() const {
  if (const auto* c = std::get_if<CategoricalEmission>(&repr_)) return c->domain;
  if (const auto* g = std::get_if<GaussianEmission>(&repr_)) return g->dim;
  return 0;
}

void Emission::validate() const {
  if (const auto* c = std::get_if<CategoricalEmission>(&repr_)) {
    if (c->table.size() != c->states * c->domain) throw ShapeError("categorical table shape");
    for (std::size_t i = 0; i < c->states; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < c->domain; ++k) {
        const double p = c->table[i * c->domain + k];
        if (!(p >= 0.0)) throw ValueError("categorical emission has a negative entry");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-9) throw ValueError("categorical emission row off the simplex");
    }
  } else if (const auto* g = std::get_if<GaussianEmission>(&repr_)) {
    if (g->means.size() != g->states * g->dim || g->variances.size() != g->states * g->dim) {
      throw ShapeError("gaussian emission shape");
    }
    for (double v : g->variances) {
      if (!(v >= kVarFloor * (1.0 - 1e-12))) throw ValueError("gaussian variance below floor");
    }
  }
}

void Emission::check_compatible(const Features& f) const {
  if (kind() != f.kind) {
    throw ShapeError("emission of kind " + to_string(kind()) + " cannot score " +
                     to_string(f.kind) + " features");
  }
  if (f.kind == FeatureKind::continuous && f.dim != gaussian().dim) {
    throw ShapeError("feature width " + std::to_string(f.dim) + " differs from emission width " +
                     std::to_string(gaussian().dim));
  }
  if (f.kind == FeatureKind::categorical) {
    const auto K = categorical().domain;
    for (auto id : f.labels) {
      if (id >= K) {
        throw ShapeError("category " + std::to_string(id) + " outside emission domain " +
                         std::to_string(K));
      }
    }
  }
}

namespace {

double gaussian_log_pdf(const GaussianEmission& g, std::span<const double> x, std::size_t i) {
  constexpr double log_two_pi = 1.8378770664093454836;  // log(2*pi)
  double acc = 0.0;
  for (std::size_t k = 0; k < g.dim; ++k) {
    const double var = g.variances[i * g.dim + k];
    const double diff = x[k] - g.means[i * g.dim + k];
    acc += log_two_pi + std::log(var) + diff * diff / var;
  }
  return -0.5 * acc;
}

}  // namespace

void Emission::log_densities(const Features& f, std::size_t item, std::span<double> out) const {
  if (const auto* c = std::get_if<CategoricalEmission>(&repr_)) {
    const auto k = f.labels[item];
    for (std::size_t i = 0; i < c->states; ++i) out[i] = std::log(c->table[i * c->domain + k]);
  } else {
    const auto& g = std::get<GaussianEmission>(repr_);
    const auto x = f.row(item);
    for (std::size_t i = 0; i < g.states; ++i) out[i] = gaussian_log_pdf(g, x, i);
  }
}

double Emission::log_density(Observation x, std::size_t state) const {
  if (state >= states()) throw ShapeError("state index out of range");
  if (const auto* c = std::get_if<CategoricalEmission>(&repr_)) {
    const auto* k = std::get_if<std::uint32_t>(&x);
    if (k == nullptr || *k >= c->domain) throw ShapeError("categorical emission needs a label < K");
    return std::log(c->table[state * c->domain + *k]);
  }
  const auto& g = std::get<GaussianEmission>(repr_);
  const auto* row = std::get_if<std::span<const double>>(&x);
  if (row == nullptr || row->size() != g.dim) {
    throw ShapeError("gaussian emission needs a real vector of width " + std::to_string(g.dim));
  }
  return gaussian_log_pdf(g, *row, state);
}

double emission_density(const Emission& e, Observation x, std::size_t state) {
  return std::exp(e.log_density(x, state));
}

// ---------------------------------------------------------------------------

TransitionTensor TransitionTensor::uniform(std::size_t groups, std::size_t targets,
                                           std::size_t sources) {
  return {groups, targets, sources,
          std::vector<double>(groups * targets * sources, 1.0 / static_cast<double>(targets))};
}

TransitionTensor TransitionTensor::random(Rng& rng, std::size_t groups, std::size_t targets,
                                          std::size_t sources) {
  TransitionTensor t{groups, targets, sources, std::vector<double>(groups * targets * sources)};
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t j = 0; j < sources; ++j) {
      const auto col = dirichlet_uniform(rng, targets);
      for (std::size_t i = 0; i < targets; ++i) t.probs[(a * targets + i) * sources + j] = col[i];
    }
  }
  return t;
}

void TransitionTensor::validate() const {
  if (probs.size() != groups * targets * sources) throw ShapeError("transition tensor shape");
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t j = 0; j < sources; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < targets; ++i) s += (*this)(a, i, j);
      if (std::abs(s - 1.0) > 1e-9) throw ValueError("transition column off the simplex");
    }
  }
}

void SPPrior::validate() const {
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValueError("negative switching-parent weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ValueError("switching-parent prior off the simplex");
}

// ---------------------------------------------------------------------------

EmissionStats EmissionStats::zeros(FeatureKind kind, std::size_t states, std::size_t width) {
  EmissionStats s;
  s.kind = kind;
  s.states = states;
  s.width = width;
  s.mass.assign(states, 0.0);
  s.counts.assign(states * width, 0.0);
  if (kind == FeatureKind::continuous) s.sumsq.assign(states * width, 0.0);
  return s;
}

void EmissionStats::add(const Features& f, std::size_t item, std::span<const double> resp) {
  for (std::size_t i = 0; i < states; ++i) mass[i] += resp[i];
  if (kind == FeatureKind::categorical) {
    const auto k = f.labels[item];
    for (std::size_t i = 0; i < states; ++i) counts[i * width + k] += resp[i];
  } else {
    const auto x = f.row(item);
    for (std::size_t i = 0; i < states; ++i) {
      for (std::size_t d = 0; d < width; ++d) {
        counts[i * width + d] += resp[i] * x[d];
        sumsq[i * width + d] += resp[i] * x[d] * x[d];
      }
    }
  }
}

namespace {

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  if (dst.size() != src.size()) throw ShapeError("cannot merge statistics of different shapes");
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

}  // namespace

void EmissionStats::merge(const EmissionStats& other) {
  if (kind != other.kind || states != other.states || width != other.width) {
    throw ShapeError("cannot merge emission statistics of different shapes");
  }
  add_into(mass, other.mass);
  add_into(counts, other.counts);
  add_into(sumsq, other.sumsq);
}

SuffStats SuffStats::zeros(FeatureKind kind, std::size_t width, std::size_t groups,
                           std::size_t targets, std::size_t sources) {
  SuffStats s;
  s.emission = EmissionStats::zeros(kind, targets, width);
  s.transition.assign(groups * targets * sources, 0.0);
  s.sp.assign(groups, 0.0);
  s.sp_exposure.assign(groups, 0.0);
  s.mixture.assign(targets, 0.0);
  return s;
}

void SuffStats::merge(const SuffStats& other) {
  emission.merge(other.emission);
  add_into(transition, other.transition);
  add_into(sp, other.sp);
  add_into(sp_exposure, other.sp_exposure);
  add_into(mixture, other.mixture);
  log_likelihood += other.log_likelihood;
  items += other.items;
}

// ---------------------------------------------------------------------------

Emission emission_m_step(const EmissionStats& acc, const Emission& prev) {
  if (acc.kind != prev.kind() || acc.states != prev.states() || acc.width != prev.width()) {
    throw ShapeError("emission statistics do not match the emission being updated");
  }
  if (acc.kind == FeatureKind::categorical) {
    CategoricalEmission next = prev.categorical();
    const auto K = next.domain;
    for (std::size_t i = 0; i < acc.states; ++i) {
      if (!(acc.mass[i] > 0.0)) continue;
      const auto row = simplex_project(std::span(acc.counts).subspan(i * K, K));
      std::copy(row.begin(), row.end(), next.table.begin() + static_cast<std::ptrdiff_t>(i * K));
    }
    return Emission(std::move(next));
  }
  GaussianEmission next = prev.gaussian();
  const auto d = next.dim;
  for (std::size_t i = 0; i < acc.states; ++i) {
    const double w = acc.mass[i];
    if (!(w > 0.0)) continue;
    for (std::size_t k = 0; k < d; ++k) {
      const double mean = acc.counts[i * d + k] / w;
      const double var = acc.sumsq[i * d + k] / w - mean * mean;
      next.means[i * d + k] = mean;
      next.variances[i * d + k] = std::max(var, kVarFloor);
    }
  }
  return Emission(std::move(next));
}

TransitionTensor transition_m_step(const SuffStats& acc, const TransitionTensor& prev) {
  if (acc.transition.size() != prev.probs.size()) throw ShapeError("transition statistics shape");
  TransitionTensor next = prev;
  std::vector<double> column(prev.targets);
  for (std::size_t a = 0; a < prev.groups; ++a) {
    for (std::size_t j = 0; j < prev.sources; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < prev.targets; ++i) {
        column[i] = acc.transition[(a * prev.targets + i) * prev.sources + j];
        total += column[i];
      }
      if (!(total > 0.0)) continue;
      const auto p = simplex_project(column);
      for (std::size_t i = 0; i < prev.targets; ++i) {
        next.probs[(a * prev.targets + i) * prev.sources + j] = p[i];
      }
    }
  }
  return next;
}

SPPrior sp_m_step(const SuffStats& acc, const SPPrior& prev) {
  const std::size_t A = prev.weights.size();
  if (acc.sp.size() != A || acc.sp_exposure.size() != A) throw ShapeError("SP statistics shape");
  // Minorize-maximize step for P(S=a) renormalized over each item's non-empty
  // groups: w_a = N_a / sum_u [a in G_u] / sum_{b in G_u} w_b. Groups never
  // exposed keep their previous share.
  std::vector<double> raw(A, 0.0);
  double exposed_total = 0.0;
  double hidden_share = 0.0;
  bool any = false;
  for (std::size_t a = 0; a < A; ++a) {
    if (acc.sp_exposure[a] > 0.0) {
      raw[a] = acc.sp[a] / acc.sp_exposure[a];
      exposed_total += raw[a];
      any = true;
    } else {
      hidden_share += prev.weights[a];
    }
  }
  if (!any || !(exposed_total > 0.0)) return prev;
  for (std::size_t a = 0; a < A; ++a) {
    raw[a] = acc.sp_exposure[a] > 0.0 ? raw[a] / exposed_total * (1.0 - hidden_share)
                                      : prev.weights[a];
  }
  return SPPrior{simplex_project(raw)};
}

std::vector<double> mixture_m_step(const SuffStats& acc, std::span<const double> prev) {
  if (acc.mixture.size() != prev.size()) throw ShapeError("mixture statistics shape");
  const double total = std::accumulate(acc.mixture.begin(), acc.mixture.end(), 0.0);
  if (!(total > 0.0)) return {prev.begin(), prev.end()};
  return simplex_project(acc.mixture);
}

Emission random_emission(Rng& rng, const Features& data, std::size_t states, std::size_t domain) {
  if (data.kind == FeatureKind::categorical) {
    CategoricalEmission c{states, domain, std::vector<double>(states * domain)};
    for (std::size_t i = 0; i < states; ++i) {
      const auto row = simplex_project(dirichlet_uniform(rng, domain));
      std::copy(row.begin(), row.end(), c.table.begin() + static_cast<std::ptrdiff_t>(i * domain));
    }
    return Emission(std::move(c));
  }
  if (data.kind != FeatureKind::continuous) throw ConfigError("cannot build an emission for featureless data");
  const auto d = data.dim;
  const auto n = data.size();
  GaussianEmission g{states, d, std::vector<double>(states * d, 0.0),
                     std::vector<double>(states * d, 1.0)};
  std::vector<double> mean(d, 0.0), var(d, 1.0);
  if (n > 0) {
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        s += data.values[t * d + k];
        s2 += data.values[t * d + k] * data.values[t * d + k];
      }
      mean[k] = s / static_cast<double>(n);
      var[k] = s2 / static_cast<double>(n) - mean[k] * mean[k];
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
  for (std::size_t i = 0; i < states; ++i) {
    const std::size_t t = pick(rng);
    for (std::size_t k = 0; k < d; ++k) {
      g.means[i * d + k] = n > 0 ? data.values[t * d + k] : 0.0;
      g.variances[i * d + k] = std::max(var[k], kVarFloor);
    }
  }
  return Emission(std::move(g));
}

}  // namespace ecgmm
