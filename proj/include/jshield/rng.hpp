#pragma once

#include <cstdint>
#include <vector>

namespace jshield {

// SplitMix64 generator. The algorithm is fixed here (not delegated to
// std::: distributions, whose output is implementation-defined), so every
// stream is reproducible across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [-bound, bound].
  double next_symmetric(double bound) { return (2.0 * next_unit() - 1.0) * bound; }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// Combines a global seed with a per-item id into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t global_seed, std::uint64_t item_id) {
  SplitMix64 g(global_seed ^ (item_id * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
  g.next();
  return g.next();
}

// Fisher-Yates shuffle of the identity permutation on n elements.
inline std::vector<std::uint32_t> random_permutation(std::size_t n, SplitMix64& rng) {
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace jshield
