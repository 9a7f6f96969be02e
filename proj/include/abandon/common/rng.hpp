#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace abandon {

// Mixes a base seed with stream identifiers (splitmix64 finalizer), so
// per-task streams stay independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Seeded generator with portable distributions. The standard library's
// distribution objects are implementation-defined, so everything that must
// be reproducible byte-for-byte goes through these helpers instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be > 0.
  std::size_t index(std::size_t n);
  std::int64_t integer(std::int64_t lo, std::int64_t hi);  // inclusive
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double logistic();
  int poisson(double lambda);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace abandon
