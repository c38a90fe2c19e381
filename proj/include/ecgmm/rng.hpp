#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ecgmm {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ (b + 0x632be59bd9b4e019ULL));
}

// Sample from a symmetric Dirichlet with concentration 1.
inline std::vector<double> dirichlet_uniform(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> out(n);
  double sum = 0.0;
  for (auto& v : out) {
    v = expo(rng);
    sum += v;
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace ecgmm
