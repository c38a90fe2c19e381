#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ecgmm/graph.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

// Probability floor applied after every M-step normalization.
inline constexpr double kProbFloor = 1e-12;
// Lower bound on Gaussian variances.
inline constexpr double kVarFloor = 1e-4;

// Normalizes a non-negative vector onto the simplex with every entry >= floor.
// The all-zero vector maps to the uniform distribution.
std::vector<double> simplex_project(std::span<const double> v, double floor = kProbFloor);

struct CategoricalEmission {
  std::size_t states = 0;
  std::size_t domain = 0;
  std::vector<double> table;  // states x domain, rows on the simplex
  bool operator==(const CategoricalEmission&) const = default;
};

struct GaussianEmission {
  std::size_t states = 0;
  std::size_t dim = 0;
  std::vector<double> means;      // states x dim
  std::vector<double> variances;  // states x dim, >= kVarFloor
  bool operator==(const GaussianEmission&) const = default;
};

using Observation = std::variant<std::uint32_t, std::span<const double>>;

class Emission {
 public:
  Emission() = default;
  explicit Emission(CategoricalEmission c);
  explicit Emission(GaussianEmission g);

  FeatureKind kind() const;
  std::size_t states() const;
  // categorical domain size or Gaussian dimension
  std::size_t width() const;

  const CategoricalEmission& categorical() const { return std::get<CategoricalEmission>(repr_); }
  const GaussianEmission& gaussian() const { return std::get<GaussianEmission>(repr_); }

  // log P(x_item | Q = i) for every state i.
  void log_densities(const Features& f, std::size_t item, std::span<double> out) const;
  double log_density(Observation x, std::size_t state) const;

  // Throws ShapeError when `f` cannot be scored by this emission.
  void check_compatible(const Features& f) const;
  void validate() const;

  bool operator==(const Emission&) const = default;

 private:
  std::variant<std::monostate, CategoricalEmission, GaussianEmission> repr_;
};

double emission_density(const Emission& e, Observation x, std::size_t state);

// probs[(a * targets + i) * sources + j] = P^a(Q = i | q = j); every (a, j)
// column sums to one over i.
struct TransitionTensor {
  std::size_t groups = 0;
  std::size_t targets = 0;
  std::size_t sources = 0;
  std::vector<double> probs;

  double operator()(std::size_t a, std::size_t i, std::size_t j) const {
    return probs[(a * targets + i) * sources + j];
  }
  static TransitionTensor uniform(std::size_t groups, std::size_t targets, std::size_t sources);
  static TransitionTensor random(Rng& rng, std::size_t groups, std::size_t targets,
                                 std::size_t sources);
  void validate() const;
  bool operator==(const TransitionTensor&) const = default;
};

struct SPPrior {
  std::vector<double> weights;
  void validate() const;
  bool operator==(const SPPrior&) const = default;
};

struct EmissionStats {
  FeatureKind kind = FeatureKind::none;
  std::size_t states = 0;
  std::size_t width = 0;
  std::vector<double> mass;    // per-state responsibility
  std::vector<double> counts;  // categorical: states x K weighted counts; Gaussian: weighted sums
  std::vector<double> sumsq;   // Gaussian weighted squared sums

  static EmissionStats zeros(FeatureKind kind, std::size_t states, std::size_t width);
  // Adds an observation with per-state responsibilities `resp`.
  void add(const Features& f, std::size_t item, std::span<const double> resp);
  void merge(const EmissionStats& other);
};

// Expected sufficient statistics of one component for one E-step pass.
struct SuffStats {
  EmissionStats emission;
  std::vector<double> transition;  // groups x targets x sources
  std::vector<double> sp;          // expected switching-parent counts
  // Sum over items of [group a has context] / (renormalized SP mass of the
  // item's non-empty groups); the denominator of the SP update.
  std::vector<double> sp_exposure;
  std::vector<double> mixture;  // responsibilities of items scored by the fallback prior
  double log_likelihood = 0.0;
  std::size_t items = 0;

  static SuffStats zeros(FeatureKind kind, std::size_t width, std::size_t groups,
                         std::size_t targets, std::size_t sources);
  void merge(const SuffStats& other);
};

// Emission update; states without responsibility keep their previous values.
Emission emission_m_step(const EmissionStats& acc, const Emission& prev);
TransitionTensor transition_m_step(const SuffStats& acc, const TransitionTensor& prev);
// Switching-parent update. Reduces to normalized expected counts when every
// item sees every group.
SPPrior sp_m_step(const SuffStats& acc, const SPPrior& prev);
std::vector<double> mixture_m_step(const SuffStats& acc, std::span<const double> prev);

Emission random_emission(Rng& rng, const Features& data, std::size_t states, std::size_t domain);

}  // namespace ecgmm
