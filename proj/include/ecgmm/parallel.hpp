#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecgmm {

enum class Execution { serial, parallel };

// Items per reduction block. Block boundaries depend only on the item count,
// so parallel results are identical for every thread count.
inline constexpr std::size_t kBlockSize = 512;

int max_threads();
void set_threads(int n);

// Applies `body(begin, end, acc)` to fixed-size blocks of [0, n) in parallel,
// each block with its own accumulator from `make()`, then merges the block
// accumulators in block order.
template <class Acc, class Make, class Body>
Acc block_reduce(std::size_t n, Make make, Body body) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  if (blocks <= 1) {
    Acc acc = make();
    body(std::size_t{0}, n, acc);
    return acc;
  }
  std::vector<Acc> partial(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const auto begin = static_cast<std::size_t>(b) * kBlockSize;
    const auto end = begin + kBlockSize < n ? begin + kBlockSize : n;
    Acc acc = make();
    body(begin, end, acc);
    partial[static_cast<std::size_t>(b)] = std::move(acc);
  }
  Acc total = std::move(partial[0]);
  for (std::size_t b = 1; b < blocks; ++b) total.merge(partial[b]);
  return total;
}

// Plain parallel loop over [0, n) for per-item work without reduction.
template <class Body>
void parallel_for(std::size_t n, Body body) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace ecgmm
