#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecgmm/matrix.hpp"

namespace ecgmm {

enum class Loss { cross_entropy, mean_absolute_error, binary_cross_entropy };

std::string to_string(Loss l);
Loss loss_from_string(const std::string& s);

struct MLPConfig {
  std::size_t hidden_dim = 32;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  std::size_t batch_size = 32;
  Loss loss = Loss::cross_entropy;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const MLPConfig&) const = default;
};

// Class ids (cross entropy, binary cross entropy) or a real target matrix.
struct MLPTargets {
  std::vector<std::uint32_t> labels;
  std::size_t n_classes = 0;
  Matrix values;

  static MLPTargets classes(std::vector<std::uint32_t> labels, std::size_t n_classes);
  static MLPTargets binary(std::vector<std::uint32_t> labels);
  static MLPTargets regression(Matrix values);

  std::size_t size() const { return labels.empty() ? values.rows : labels.size(); }
  MLPTargets subset(std::span<const std::size_t> rows) const;
};

struct TrainHistory {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_score = 0.0;
  double final_val_score = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_score;
};

// One hidden ReLU layer. Inputs are standardized with training statistics;
// regression outputs are trained in standardized target units.
class Predictor {
 public:
  Loss loss = Loss::cross_entropy;
  std::size_t n_inputs = 0;
  std::size_t n_outputs = 0;
  std::vector<double> x_mean, x_scale;
  std::vector<double> y_mean, y_scale;
  Matrix w1, w2;  // hidden x inputs, outputs x hidden
  std::vector<double> b1, b2;
  TrainHistory history;

  // Class probabilities (n x K), positive-class probability (n x 1) or
  // regression outputs (n x T).
  Matrix predict(const Matrix& x) const;
  std::vector<std::uint32_t> predict_class(const Matrix& x) const;
  // Accuracy for classifiers, negative MAE for regressors.
  double score(const Matrix& x, const MLPTargets& y) const;
};

Predictor train_mlp(const Matrix& x_train, const MLPTargets& y_train, const Matrix& x_val,
                    const MLPTargets& y_val, const MLPConfig& cfg);
// Holds out a seeded random `val_split` fraction of the rows for early stopping.
Predictor train_mlp(const Matrix& x, const MLPTargets& y, const MLPConfig& cfg, double val_split);

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace ecgmm
