#pragma once

#include <cstdint>
#include <span>

#include "ecgmm/matrix.hpp"

namespace ecgmm {

struct BinaryMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
};

// Fraction of scores on the correct side of 0.5 (score >= 0.5 predicts 1).
double binary_accuracy(std::span<const double> scores, std::span<const std::uint32_t> labels);
// Mann-Whitney rank statistic, tied scores share their average rank. Throws
// ValueError when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const std::uint32_t> labels);
BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const std::uint32_t> labels);

double classification_accuracy(std::span<const std::uint32_t> predicted,
                               std::span<const std::uint32_t> labels);
// Per-target MAE averaged over targets.
double mean_absolute_error(const Matrix& predicted, const Matrix& target);

}  // namespace ecgmm
