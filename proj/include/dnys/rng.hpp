#ifndef DNYS_RNG_HPP
#define DNYS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "dnys/types.hpp"

namespace dnys {

/// Deterministic random source. All draws are derived from the raw
/// mt19937_64 stream with fixed arithmetic (no library distributions),
/// so a given seed produces the same sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Rejection sampling, unbiased.
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= bound);
    return static_cast<int>(v % un);
  }

  /// Standard normal via Box-Muller. Consumes two uniforms per call.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Index draw proportional to non-negative weights.
  int weighted(const Vector& weights) {
    const double total = weights.sum();
    if (!(total > 0.0))
      throw std::invalid_argument("weighted: weights must have positive sum");
    double r = uniform() * total;
    for (int i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;  // fp leftovers land here
  }

  /// k distinct values from [0, n), Fisher-Yates on an index pool.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k > n) throw std::invalid_argument("cannot sample k > n items");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + uniform_int(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dnys

#endif
