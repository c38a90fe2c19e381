#include "ecgmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ecgmm/error.hpp"

namespace ecgmm {

namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw ShapeError("scores and labels have different lengths");
  if (a == 0) throw ValueError("metrics need at least one sample");
}

}  // namespace

double binary_accuracy(std::span<const double> scores, std::span<const std::uint32_t> labels) {
  check_aligned(scores.size(), labels.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hit += (scores[i] >= 0.5) == (labels[i] == 1);
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

double roc_auc(std::span<const double> scores, std::span<const std::uint32_t> labels) {
  check_aligned(scores.size(), labels.size());
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValueError("AUC is undefined when only one class is present");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const std::uint32_t> labels) {
  return {binary_accuracy(scores, labels), roc_auc(scores, labels)};
}

double classification_accuracy(std::span<const std::uint32_t> predicted,
                               std::span<const std::uint32_t> labels) {
  check_aligned(predicted.size(), labels.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hit += predicted[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

double mean_absolute_error(const Matrix& p, const Matrix& t) {
  if (p.rows != t.rows || p.cols != t.cols) throw ShapeError("prediction and target shapes differ");
  if (p.rows == 0 || p.cols == 0) throw ValueError("MAE needs at least one value");
  double total = 0.0;
  for (std::size_t j = 0; j < p.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.rows; ++i) s += std::abs(p(i, j) - t(i, j));
    total += s / static_cast<double>(p.rows);
  }
  return total / static_cast<double>(p.cols);
}

}  // namespace ecgmm
