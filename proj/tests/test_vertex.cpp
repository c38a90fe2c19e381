#include <doctest.h>

#include <numeric>

#include "ecgmm/stack.hpp"
#include "ecgmm/vertex_component.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "random_states.hpp"

using namespace ecgmm;

namespace {

VertexLayerParams random_params(Rng& rng, const Features& x, std::size_t domain, std::size_t cv,
                                std::size_t ce) {
  return init_vertex_params(rng, x, domain, cv, ce);
}

// Uniform previous edge states with `ce` groups.
Matrix uniform_rows(std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, 1.0 / static_cast<double>(cols));
}

}  // namespace

TEST_SUITE("vertex") {

TEST_CASE("context of one delta neighbour") {
  const auto idx = build_index(2, std::vector<Edge>{{1, 0}});
  Matrix qv(2, 3), qe(1, 2);
  qv(1, 2) = 1.0;
  qe(0, 1) = 1.0;
  const auto c = compute_vertex_context(idx, qv, qe);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(c.ctx(0, a * 3 + j) == (a == 1 && j == 2 ? 1.0 : 0.0));
  }
  CHECK(c.mass(0, 0) == 0.0);
  CHECK(c.mass(0, 1) == 1.0);
}

TEST_CASE("context of two half-weighted neighbours") {
  const auto idx = build_index(3, std::vector<Edge>{{1, 0}, {2, 0}});
  Matrix qv(3, 2), qe(2, 2, 0.5);
  qv(1, 0) = 1.0;
  qv(2, 1) = 1.0;
  const auto c = compute_vertex_context(idx, qv, qe);
  for (std::size_t k = 0; k < 4; ++k) CHECK(c.ctx(0, k) == doctest::Approx(0.5));
  CHECK(c.mass(0, 0) == doctest::Approx(1.0));
  CHECK(c.mass(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("isolated vertex has zero mass") {
  const auto idx = build_index(2, std::vector<Edge>{{1, 0}});
  const auto c = compute_vertex_context(idx, uniform_rows(2, 2), uniform_rows(1, 3));
  for (std::size_t a = 0; a < 3; ++a) CHECK(c.mass(1, a) == 0.0);
}

TEST_CASE("prior from a delta context is a transition column") {
  Rng rng(4);
  const auto x = Features::categorical({0, 0});
  auto p = random_params(rng, x, 2, 4, 3);
  const auto idx = build_index(2, std::vector<Edge>{{1, 0}});
  Matrix qv(2, 4), qe(1, 3);
  qv(1, 3) = 1.0;
  qe(0, 2) = 1.0;
  const auto c = compute_vertex_context(idx, qv, qe);
  for (const auto& sp : {std::vector<double>{0.2, 0.3, 0.5}, std::vector<double>{0.9, 0.05, 0.05}}) {
    p.sp.weights = sp;
    const auto prior = vertex_prior(c, p, 0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(prior[i] == doctest::Approx(p.transition(2, i, 3)).epsilon(1e-12));
  }
}

TEST_CASE("uniform transitions give a uniform prior") {
  Rng rng(5);
  const auto x = Features::categorical({0, 0, 0});
  auto p = random_params(rng, x, 1, 5, 2);
  p.transition = TransitionTensor::uniform(2, 5, 5);
  const auto idx = build_index(3, std::vector<Edge>{{1, 0}, {2, 0}});
  const auto c = compute_vertex_context(idx, random_posteriors(rng, 3, 5), random_posteriors(rng, 2, 2));
  for (double v : vertex_prior(c, p, 0)) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("isolated vertex falls back to the mixture") {
  Rng rng(6);
  const auto x = Features::categorical({0, 0});
  const auto p = random_params(rng, x, 1, 3, 2);
  const auto idx = build_index(2, std::vector<Edge>{{1, 0}});
  const auto c = compute_vertex_context(idx, random_posteriors(rng, 2, 3), random_posteriors(rng, 1, 2));
  CHECK(vertex_prior(c, p, 1) == p.mixture);
}

TEST_CASE("single vertex posteriors") {
  Graph g = make_graph(1, {}, {0});
  const auto b = GraphBatch::from(single_graph(g, 2));
  VertexLayerParams p;
  p.c_v = 2;
  p.c_e = 1;
  p.transition = TransitionTensor::uniform(1, 2, 2);
  p.sp.weights = {1.0};
  p.mixture = {0.5, 0.5};
  p.emission = Emission(CategoricalEmission{2, 2, {0.4, 0.6, 0.4, 0.6}});
  auto r = vertex_infer(b, p, {}, Execution::serial);
  CHECK(r.posteriors(0, 0) == doctest::Approx(0.5));
  p.emission = Emission(CategoricalEmission{2, 2, {0.75, 0.25, 0.25, 0.75}});
  r = vertex_infer(b, p, {}, Execution::serial);
  CHECK(r.posteriors(0, 0) == doctest::Approx(0.75));
  CHECK(r.posteriors(0, 1) == doctest::Approx(0.25));
}

TEST_CASE("responsibilities match direct enumeration") {
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const auto ds = tiny_dataset(rng);
    const auto b = GraphBatch::from(ds);
    const auto p = random_params(rng, b.x, 3, 2, 2);
    const auto qv = random_posteriors(rng, b.n_vertices, 2);
    const auto qe = random_posteriors(rng, b.n_edges(), 2);
    for (bool layer0 : {true, false}) {
      const PrevStates prev = layer0 ? PrevStates{} : PrevStates{&qv, &qe};
      for (std::size_t u = 0; u < b.n_vertices; ++u) {
        const auto got = vertex_responsibilities(b, p, prev, u);
        const auto want = oracle::vertex_responsibilities(b, p, prev.vertex, prev.edge, u);
        REQUIRE(got.uses_mixture == want.mixture);
        CHECK(max_abs_diff(got.values, want.r) < 1e-10);
        CHECK(std::accumulate(got.values.begin(), got.values.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("E-step transition statistics sum the responsibilities") {
  Rng rng(12);
  const auto ds = tiny_dataset(rng, 6);
  const auto b = GraphBatch::from(ds);
  const auto p = random_params(rng, b.x, 3, 2, 2);
  const auto qv = random_posteriors(rng, b.n_vertices, 2);
  const auto qe = random_posteriors(rng, b.n_edges(), 2);
  const auto r = vertex_e_step(b, p, {&qv, &qe}, Execution::serial);
  std::vector<double> want(8, 0.0);
  for (std::size_t u = 0; u < b.n_vertices; ++u) {
    const auto o = oracle::vertex_responsibilities(b, p, &qv, &qe, u);
    if (o.mixture) continue;
    // oracle order (i, a, j), statistics order (a, i, j)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t j = 0; j < 2; ++j) want[(a * 2 + i) * 2 + j] += o.r[(i * 2 + a) * 2 + j];
  }
  CHECK(max_abs_diff(r.stats.transition, want) < 1e-10);
}

TEST_CASE("SP update with all mass on one group") {
  auto s = SuffStats::zeros(FeatureKind::categorical, 2, 2, 2, 2);
  s.sp = {0.0, 5.0};
  s.sp_exposure = {5.0, 5.0};
  s.items = 5;
  const auto sp = sp_m_step(s, SPPrior{{0.5, 0.5}});
  CHECK(sp.weights[0] == doctest::Approx(kProbFloor));
  CHECK(sp.weights[1] == doctest::Approx(1.0));
}

TEST_CASE("transition update with one active cell") {
  Rng rng(2);
  const auto x = Features::categorical({0});
  const auto p = random_params(rng, x, 1, 2, 2);
  auto s = SuffStats::zeros(FeatureKind::categorical, 1, 2, 2, 2);
  s.transition[(0 * 2 + 1) * 2 + 0] = 3.0;
  s.sp = {3.0, 0.0};
  s.sp_exposure = {3.0, 3.0};
  s.emission.mass = {0.0, 3.0};
  s.emission.counts = {0.0, 3.0};
  s.items = 3;
  const auto next = vertex_m_step(s, p);
  CHECK(next.transition(0, 1, 0) == doctest::Approx(1.0));
  CHECK(next.transition(0, 0, 0) == doctest::Approx(kProbFloor));
  // columns without statistics keep their values
  CHECK(next.transition(1, 0, 1) == p.transition(1, 0, 1));
}

TEST_CASE("merged statistics equal the statistics of the concatenation") {
  Rng rng(13);
  const auto d1 = tiny_dataset(rng, 5), d2 = tiny_dataset(rng, 7);
  const auto b1 = GraphBatch::from(d1), b2 = GraphBatch::from(d2), b12 = GraphBatch::from(concat(d1, d2));
  const auto p = random_params(rng, b12.x, 3, 3, 2);
  const auto v1 = random_posteriors(rng, b1.n_vertices, 3), v2 = random_posteriors(rng, b2.n_vertices, 3);
  const auto e1 = random_posteriors(rng, b1.n_edges(), 2), e2 = random_posteriors(rng, b2.n_edges(), 2);
  const auto v12 = stack_rows(v1, v2), e12 = stack_rows(e1, e2);

  auto s = vertex_e_step(b1, p, {&v1, &e1}, Execution::serial).stats;
  s.merge(vertex_e_step(b2, p, {&v2, &e2}, Execution::serial).stats);
  const auto whole = vertex_e_step(b12, p, {&v12, &e12}, Execution::serial);
  const auto m1 = vertex_m_step(s, p), m2 = vertex_m_step(whole.stats, p);
  CHECK(max_abs_diff(m1.transition.probs, m2.transition.probs) < 1e-9);
  CHECK(max_abs_diff(m1.sp.weights, m2.sp.weights) < 1e-9);
  CHECK(max_abs_diff(m1.mixture, m2.mixture) < 1e-9);
  CHECK(max_abs_diff(m1.emission.categorical().table, m2.emission.categorical().table) < 1e-9);
  CHECK(s.log_likelihood == doctest::Approx(whole.stats.log_likelihood).epsilon(1e-12));
}

TEST_CASE("argmax state and tie break") {
  const std::vector<double> a{0.1, 0.7, 0.2}, t{0.5, 0.5};
  CHECK(argmax_state(a) == 1);
  CHECK(argmax_state(t) == 0);
}

TEST_CASE("inference equals E-step marginals") {
  Rng rng(14);
  const auto ds = tiny_dataset(rng, 20);
  const auto b = GraphBatch::from(ds);
  const auto p = random_params(rng, b.x, 3, 3, 2);
  const auto qv = random_posteriors(rng, b.n_vertices, 3);
  const auto qe = random_posteriors(rng, b.n_edges(), 2);
  const auto e = vertex_e_step(b, p, {&qv, &qe}, Execution::serial);
  const auto inf = vertex_infer(b, p, {&qv, &qe}, Execution::serial);
  CHECK(max_abs_diff(e.posteriors, inf.posteriors) < 1e-9);
  CHECK(inf.log_likelihood == doctest::Approx(e.log_likelihood).epsilon(1e-12));
  for (std::size_t u = 0; u < b.n_vertices; ++u) {
    CHECK(inf.states[u] == argmax_state(inf.posteriors.row(u)));
    // marginal over (a, j) of the enumeration
    const auto o = oracle::vertex_responsibilities(b, p, &qv, &qe, u);
    for (std::size_t i = 0; i < 3; ++i) {
      double m = 0.0;
      const std::size_t per = o.mixture ? 1 : 6;
      for (std::size_t k = 0; k < per; ++k) m += o.r[i * per + k];
      CHECK(inf.posteriors(u, i) == doctest::Approx(m).epsilon(1e-9));
    }
  }
}

TEST_CASE("parallel E-step matches the serial reference for every thread count") {
  CommunityConfig cc;
  const auto ds = two_community_dataset(60, cc, 21);
  const auto b = GraphBatch::from(ds);
  REQUIRE(b.n_vertices > 3 * kBlockSize);
  Rng rng(15);
  const auto p = random_params(rng, b.x, cc.n_labels, 6, 3);
  const auto qv = random_posteriors(rng, b.n_vertices, 6);
  const auto qe = random_posteriors(rng, b.n_edges(), 3);
  const int before = max_threads();
  const auto s = vertex_e_step(b, p, {&qv, &qe}, Execution::serial);
  set_threads(1);
  const auto one = vertex_e_step(b, p, {&qv, &qe}, Execution::parallel);
  CHECK(max_abs_diff(one.stats.transition, s.stats.transition) < 1e-9);
  CHECK(max_abs_diff(one.stats.emission.counts, s.stats.emission.counts) < 1e-9);
  CHECK(max_abs_diff(one.stats.sp, s.stats.sp) < 1e-9);
  CHECK(one.log_likelihood == doctest::Approx(s.log_likelihood).epsilon(1e-12));
  CHECK(one.posteriors == s.posteriors);
  for (int threads : {2, 3, 4}) {
    set_threads(threads);
    const auto q = vertex_e_step(b, p, {&qv, &qe}, Execution::parallel);
    CHECK(q.stats.transition == one.stats.transition);
    CHECK(q.stats.emission.counts == one.stats.emission.counts);
    CHECK(q.stats.sp == one.stats.sp);
    CHECK(q.stats.sp_exposure == one.stats.sp_exposure);
    CHECK(q.log_likelihood == one.log_likelihood);
  }
  set_threads(before);
}

TEST_CASE("posteriors lie on the simplex") {
  Rng rng(16);
  const auto ds = tiny_dataset(rng, 30);
  const auto b = GraphBatch::from(ds);
  const auto p = random_params(rng, b.x, 3, 4, 3);
  const auto qv = random_posteriors(rng, b.n_vertices, 4);
  const auto qe = random_posteriors(rng, b.n_edges(), 3);
  const auto r = vertex_infer(b, p, {&qv, &qe});
  for (std::size_t u = 0; u < b.n_vertices; ++u) {
    double s = 0.0;
    for (double v : r.posteriors.row(u)) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

}
