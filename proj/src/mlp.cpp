#include "ecgmm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ecgmm/error.hpp"
#include "ecgmm/rng.hpp"

namespace ecgmm {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using Vec = Eigen::VectorXd;

std::string to_string(Loss l) {
  switch (l) {
    case Loss::cross_entropy: return "cross_entropy";
    case Loss::mean_absolute_error: return "mae";
    case Loss::binary_cross_entropy: return "bce";
  }
  return "cross_entropy";
}

Loss loss_from_string(const std::string& s) {
  if (s == "cross_entropy" || s == "ce") return Loss::cross_entropy;
  if (s == "mae" || s == "mean_absolute_error") return Loss::mean_absolute_error;
  if (s == "bce" || s == "binary_cross_entropy") return Loss::binary_cross_entropy;
  throw ConfigError("unknown loss '" + s + "'");
}

void MLPConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

MLPTargets MLPTargets::classes(std::vector<std::uint32_t> labels, std::size_t n_classes) {
  for (auto l : labels) {
    if (l >= n_classes) throw ValueError("class label " + std::to_string(l) + " out of range");
  }
  MLPTargets t;
  t.labels = std::move(labels);
  t.n_classes = n_classes;
  return t;
}

MLPTargets MLPTargets::binary(std::vector<std::uint32_t> labels) {
  return classes(std::move(labels), 2);
}

MLPTargets MLPTargets::regression(Matrix values) {
  MLPTargets t;
  t.values = std::move(values);
  return t;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

MLPTargets MLPTargets::subset(std::span<const std::size_t> rows) const {
  MLPTargets t;
  t.n_classes = n_classes;
  if (!labels.empty()) {
    for (auto r : rows) t.labels.push_back(labels[r]);
  } else {
    t.values = select_rows(values, rows);
  }
  return t;
}

namespace {

struct Net {
  RowMat w1, w2;
  Vec b1, b2;
};

RowMat standardize(const Matrix& x, const std::vector<double>& mean, const std::vector<double>& scale) {
  RowMat z = CMapMat(x.data.data(), static_cast<Eigen::Index>(x.rows), static_cast<Eigen::Index>(x.cols));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    z.col(j) = (z.col(j).array() - mean[j]) / scale[j];
  }
  return z;
}

RowMat forward(const Net& n, const RowMat& x, RowMat* hidden = nullptr) {
  RowMat h = ((x * n.w1.transpose()).rowwise() + n.b1.transpose()).cwiseMax(0.0);
  RowMat o = (h * n.w2.transpose()).rowwise() + n.b2.transpose();
  if (hidden) *hidden = std::move(h);
  return o;
}

void softmax_rows(RowMat& o) {
  for (Eigen::Index r = 0; r < o.rows(); ++r) {
    const double top = o.row(r).maxCoeff();
    o.row(r) = (o.row(r).array() - top).exp();
    o.row(r) /= o.row(r).sum();
  }
}

Matrix to_matrix(const RowMat& m) {
  Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  MapMat(out.data.data(), m.rows(), m.cols()) = m;
  return out;
}

void check_finite(const Matrix& x) {
  for (double v : x.data) {
    if (!std::isfinite(v)) throw ValueError("MLP inputs must be finite");
  }
}

struct Adam {
  RowMat m1, v1, m2, v2;
  Vec mb1, vb1, mb2, vb2;
  std::size_t t = 0;

  explicit Adam(const Net& n)
      : m1(RowMat::Zero(n.w1.rows(), n.w1.cols())), v1(m1), m2(RowMat::Zero(n.w2.rows(), n.w2.cols())),
        v2(m2), mb1(Vec::Zero(n.b1.size())), vb1(mb1), mb2(Vec::Zero(n.b2.size())), vb2(mb2) {}

  template <class P, class G, class M>
  static void update(P& p, const G& g, M& m, M& v, double lr, double c1, double c2) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }

  void step(Net& n, const RowMat& g1, const Vec& gb1, const RowMat& g2, const Vec& gb2, double lr) {
    ++t;
    const double c1 = 1 - std::pow(0.9, static_cast<double>(t));
    const double c2 = 1 - std::pow(0.999, static_cast<double>(t));
    update(n.w1, g1, m1, v1, lr, c1, c2);
    update(n.b1, gb1, mb1, vb1, lr, c1, c2);
    update(n.w2, g2, m2, v2, lr, c1, c2);
    update(n.b2, gb2, mb2, vb2, lr, c1, c2);
  }
};

void store(Predictor& p, const Net& n) {
  p.w1 = to_matrix(n.w1);
  p.w2 = to_matrix(n.w2);
  p.b1.assign(n.b1.data(), n.b1.data() + n.b1.size());
  p.b2.assign(n.b2.data(), n.b2.data() + n.b2.size());
}

void check_targets(const MLPTargets& y, Loss loss, std::size_t rows) {
  if (y.size() != rows) throw ShapeError("targets and inputs have different row counts");
  const bool regression = loss == Loss::mean_absolute_error;
  if (regression != y.labels.empty() && rows > 0) {
    throw ConfigError("loss " + to_string(loss) + " does not match the target type");
  }
  if (loss == Loss::binary_cross_entropy && y.n_classes != 2) {
    throw ConfigError("binary cross entropy needs two classes");
  }
}

}  // namespace

Matrix Predictor::predict(const Matrix& x) const {
  if (x.cols != n_inputs) {
    throw ShapeError("predictor expects " + std::to_string(n_inputs) + " inputs, got " +
                     std::to_string(x.cols));
  }
  Net n;
  n.w1 = CMapMat(w1.data.data(), static_cast<Eigen::Index>(w1.rows), static_cast<Eigen::Index>(w1.cols));
  n.w2 = CMapMat(w2.data.data(), static_cast<Eigen::Index>(w2.rows), static_cast<Eigen::Index>(w2.cols));
  n.b1 = Eigen::Map<const Vec>(b1.data(), static_cast<Eigen::Index>(b1.size()));
  n.b2 = Eigen::Map<const Vec>(b2.data(), static_cast<Eigen::Index>(b2.size()));
  RowMat o = forward(n, standardize(x, x_mean, x_scale));
  switch (loss) {
    case Loss::cross_entropy: softmax_rows(o); break;
    case Loss::binary_cross_entropy: o = (1.0 / (1.0 + (-o.array()).exp())).matrix(); break;
    case Loss::mean_absolute_error:
      for (Eigen::Index j = 0; j < o.cols(); ++j) o.col(j) = o.col(j).array() * y_scale[j] + y_mean[j];
      break;
  }
  return to_matrix(o);
}

std::vector<std::uint32_t> Predictor::predict_class(const Matrix& x) const {
  const Matrix p = predict(x);
  std::vector<std::uint32_t> out(p.rows);
  for (std::size_t r = 0; r < p.rows; ++r) {
    if (loss == Loss::binary_cross_entropy) {
      out[r] = p(r, 0) >= 0.5 ? 1 : 0;
    } else {
      const auto row = p.row(r);
      out[r] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
  }
  return out;
}

double Predictor::score(const Matrix& x, const MLPTargets& y) const {
  if (y.size() == 0) return 0.0;
  if (loss == Loss::mean_absolute_error) {
    const Matrix p = predict(x);
    double err = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) err += std::abs(p.data[i] - y.values.data[i]);
    return -err / static_cast<double>(p.data.size());
  }
  const auto c = predict_class(x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < c.size(); ++i) hit += c[i] == y.labels[i];
  return static_cast<double>(hit) / static_cast<double>(c.size());
}

Predictor train_mlp(const Matrix& x_train, const MLPTargets& y_train, const Matrix& x_val,
                    const MLPTargets& y_val, const MLPConfig& cfg) {
  cfg.validate();
  if (x_train.rows == 0) throw ConfigError("no training rows for the MLP");
  check_finite(x_train);
  check_finite(x_val);
  check_targets(y_train, cfg.loss, x_train.rows);
  check_targets(y_val, cfg.loss, x_val.rows);
  if (x_val.rows > 0 && x_val.cols != x_train.cols) throw ShapeError("validation width differs");

  Predictor p;
  p.loss = cfg.loss;
  p.n_inputs = x_train.cols;
  p.n_outputs = cfg.loss == Loss::cross_entropy           ? y_train.n_classes
                : cfg.loss == Loss::binary_cross_entropy ? 1
                                                         : y_train.values.cols;
  const std::size_t n = x_train.rows, d = x_train.cols, h = cfg.hidden_dim, o = p.n_outputs;

  p.x_mean.assign(d, 0.0);
  p.x_scale.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x_train(i, j);
    const double mean = s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (x_train(i, j) - mean) * (x_train(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    p.x_mean[j] = mean;
    p.x_scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  RowMat y_std;
  if (cfg.loss == Loss::mean_absolute_error) {
    p.y_mean.assign(o, 0.0);
    p.y_scale.assign(o, 1.0);
    y_std = CMapMat(y_train.values.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(o));
    for (std::size_t j = 0; j < o; ++j) {
      const auto col = y_std.col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      p.y_mean[j] = mean;
      p.y_scale[j] = sd > 1e-12 ? sd : 1.0;
      y_std.col(static_cast<Eigen::Index>(j)) = (col.array() - mean) / p.y_scale[j];
    }
  }
  const RowMat z = standardize(x_train, p.x_mean, p.x_scale);

  Rng rng(cfg.seed);
  Net net;
  net.w1.resize(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(d));
  net.w2.resize(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(h));
  const double r1 = std::sqrt(6.0 / static_cast<double>(d + h));
  const double r2 = std::sqrt(6.0 / static_cast<double>(h + o));
  std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
  for (Eigen::Index i = 0; i < net.w1.size(); ++i) net.w1.data()[i] = u1(rng);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2.data()[i] = u2(rng);
  net.b1 = Vec::Zero(static_cast<Eigen::Index>(h));
  net.b2 = Vec::Zero(static_cast<Eigen::Index>(o));
  Adam adam(net);

  const bool has_val = x_val.rows > 0;
  const Matrix& sx = has_val ? x_val : x_train;
  const MLPTargets& sy = has_val ? y_val : y_train;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const std::size_t bs = std::min(cfg.batch_size, n);

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(start + bs, n);
      const auto b = static_cast<Eigen::Index>(end - start);
      RowMat xb(b, static_cast<Eigen::Index>(d));
      for (Eigen::Index r = 0; r < b; ++r) xb.row(r) = z.row(static_cast<Eigen::Index>(order[start + r]));
      RowMat hid;
      RowMat out = forward(net, xb, &hid);
      RowMat g(out.rows(), out.cols());
      double loss = 0.0;
      for (Eigen::Index r = 0; r < b; ++r) {
        const std::size_t row = order[start + static_cast<std::size_t>(r)];
        if (cfg.loss == Loss::cross_entropy) {
          const double top = out.row(r).maxCoeff();
          const auto e = (out.row(r).array() - top).exp();
          const double s = e.sum();
          const auto lab = static_cast<Eigen::Index>(y_train.labels[row]);
          loss += -(out(r, lab) - top - std::log(s));
          g.row(r) = e / s;
          g(r, lab) -= 1.0;
        } else if (cfg.loss == Loss::binary_cross_entropy) {
          const double t = y_train.labels[row];
          const double s = out(r, 0);
          loss += std::max(s, 0.0) - s * t + std::log1p(std::exp(-std::abs(s)));
          g(r, 0) = 1.0 / (1.0 + std::exp(-s)) - t;
        } else {
          for (Eigen::Index j = 0; j < out.cols(); ++j) {
            const double diff = out(r, j) - y_std(static_cast<Eigen::Index>(row), j);
            loss += std::abs(diff) / static_cast<double>(o);
            g(r, j) = (diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0) / static_cast<double>(o);
          }
        }
      }
      g /= static_cast<double>(b);
      epoch_loss += loss;
      RowMat gw2 = g.transpose() * hid + cfg.weight_decay * net.w2;
      Vec gb2 = g.colwise().sum().transpose();
      RowMat gh = (g * net.w2).cwiseProduct((hid.array() > 0.0).cast<double>().matrix());
      RowMat gw1 = gh.transpose() * xb + cfg.weight_decay * net.w1;
      Vec gb1 = gh.colwise().sum().transpose();
      adam.step(net, gw1, gb1, gw2, gb2, cfg.learning_rate);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("MLP loss became non-finite at epoch " + std::to_string(epoch));
    }
    p.history.train_loss.push_back(epoch_loss);
    Predictor probe = p;
    store(probe, net);
    const double val = probe.score(sx, sy);
    p.history.val_score.push_back(val);
    p.history.epochs_run = epoch + 1;
    p.history.final_val_score = val;
    if (val > best) {
      best = val;
      since_best = 0;
      p.history.best_epoch = epoch;
      p.history.best_val_score = val;
      store(p, net);
    } else if (++since_best >= cfg.patience && cfg.patience > 0) {
      break;
    }
  }
  return p;
}

Predictor train_mlp(const Matrix& x, const MLPTargets& y, const MLPConfig& cfg, double val_split) {
  if (!(val_split >= 0.0 && val_split < 1.0)) throw ConfigError("val_split must be in [0, 1)");
  std::vector<std::size_t> idx(x.rows);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(cfg.seed, 0x5eed));
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(val_split * static_cast<double>(x.rows)));
  if (n_val >= x.rows) n_val = x.rows - 1;
  std::span<const std::size_t> all(idx);
  const auto val = all.first(n_val);
  const auto train = all.subspan(n_val);
  return train_mlp(select_rows(x, train), y.subset(train), select_rows(x, val), y.subset(val), cfg);
}

}  // namespace ecgmm
