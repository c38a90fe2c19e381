#include <doctest.h>

#include <limits>
#include <random>

#include "ecgmm/error.hpp"
#include "ecgmm/mlp.hpp"
#include "ecgmm/rng.hpp"
#include "helpers.hpp"

using namespace ecgmm;

namespace {

struct Blobs {
  Matrix x;
  std::vector<std::uint32_t> y;
};

Blobs blobs(std::size_t n, double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Blobs b{Matrix(n, 3), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::uint32_t>(i % 2);
    for (std::size_t k = 0; k < 3; ++k) b.x(i, k) = noise(rng) + (c == 1 && k == 0 ? separation : 0.0);
    b.y.push_back(c);
  }
  return b;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("separable blobs are learned") {
  const auto b = blobs(200, 10.0, 1);
  MLPConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.max_epochs = 100;
  const auto y = MLPTargets::classes(b.y, 2);
  const auto p = train_mlp(b.x, y, b.x, y, cfg);
  CHECK(p.score(b.x, y) >= 0.99);
  CHECK(p.history.epochs_run >= 1);
}

TEST_CASE("binary loss on separable blobs") {
  const auto b = blobs(200, 10.0, 2);
  MLPConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.loss = Loss::binary_cross_entropy;
  const auto y = MLPTargets::binary(b.y);
  const auto p = train_mlp(b.x, y, b.x, y, cfg);
  CHECK(p.score(b.x, y) >= 0.99);
  const auto out = p.predict(b.x);
  CHECK(out.cols == 1);
  for (double v : out.data) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("constant inputs predict the majority class") {
  const std::size_t n = 50;
  Matrix x(n, 2, 1.0);
  std::vector<std::uint32_t> labels(n, 0);
  for (std::size_t i = 0; i < 15; ++i) labels[i] = 1;
  const auto y = MLPTargets::classes(labels, 2);
  MLPConfig cfg;
  cfg.learning_rate = 1e-2;
  const auto p = train_mlp(x, y, x, y, cfg);
  CHECK(p.score(x, y) == doctest::Approx(35.0 / 50.0).epsilon(1.0 / 50.0));
}

TEST_CASE("linear regression target is reachable") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 300;
  Matrix x(n, 2), y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = u(rng);
    x(i, 1) = u(rng);
    y(i, 0) = 2.0 * x(i, 0) - x(i, 1) + 0.5;
  }
  MLPConfig cfg;
  cfg.loss = Loss::mean_absolute_error;
  cfg.learning_rate = 1e-2;
  cfg.max_epochs = 400;
  cfg.patience = 50;
  const auto t = MLPTargets::regression(y);
  const auto p = train_mlp(x, t, x, t, cfg);
  CHECK(-p.score(x, t) <= 0.05);
}

TEST_CASE("training is deterministic for a seed") {
  const auto b = blobs(60, 2.0, 4);
  const auto y = MLPTargets::classes(b.y, 2);
  MLPConfig cfg;
  cfg.max_epochs = 20;
  cfg.seed = 7;
  const auto p = train_mlp(b.x, y, cfg, 0.2);
  const auto q = train_mlp(b.x, y, cfg, 0.2);
  CHECK(p.w1 == q.w1);
  CHECK(p.predict(b.x) == q.predict(b.x));
}

TEST_CASE("early stopping keeps the best epoch") {
  const auto b = blobs(80, 0.0, 5);
  const auto y = MLPTargets::classes(b.y, 2);
  MLPConfig cfg;
  cfg.learning_rate = 5e-2;
  cfg.hidden_dim = 64;
  cfg.max_epochs = 300;
  cfg.patience = 5;
  const auto p = train_mlp(b.x, y, cfg, 0.25);
  CHECK(p.history.epochs_run < 300);
  CHECK(p.history.best_epoch + cfg.patience >= p.history.epochs_run - 1);
  CHECK(p.history.val_score.size() == p.history.epochs_run);
}

TEST_CASE("bad configurations") {
  MLPConfig cfg;
  cfg.hidden_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(loss_from_string("hinge"), ConfigError);
  const auto b = blobs(10, 1.0, 6);
  const auto y = MLPTargets::classes(std::vector<std::uint32_t>(9, 0), 2);
  CHECK_THROWS(train_mlp(b.x, y, b.x, y, MLPConfig{}));
}

TEST_CASE("diverging training names the epoch") {
  const auto b = blobs(40, 1.0, 7);
  const auto y = MLPTargets::classes(b.y, 2);
  Matrix x = b.x;
  x(3, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train_mlp(x, y, x, y, MLPConfig{}), ValueError);
  MLPConfig cfg;
  cfg.learning_rate = 1e300;
  try {
    train_mlp(b.x, y, b.x, y, cfg);
    FAIL("expected divergence");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

}
