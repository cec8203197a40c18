#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cte/numeric.hpp"

namespace cte {

// splitmix64 finalizer; the basis of seed derivation
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, tag). Samplers take explicit
// seeds or streams; per-item seeds derived this way make sampling order-free
// and safe to parallelize.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

// Deterministic random stream. mt19937_64 output is fixed by the standard and
// all distributions below are implemented here, so sequences are bit-stable
// across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform01_open0() { return 1.0 - uniform01(); }

  std::uint64_t uniform_below(std::uint64_t n) {
    CTE_CHECK(n > 0, "uniform_below: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential() { return -std::log(uniform01_open0()); }

  // Marsaglia–Tsang; shapes < 1 boosted via Gamma(a+1) * U^{1/a}
  double gamma(double shape) {
    CTE_CHECK(shape > 0.0, "gamma: shape must be positive");
    if (shape < 1.0) {
      double g = gamma(shape + 1.0);
      return g * std::pow(uniform01_open0(), 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01_open0();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // symmetric Dirichlet(alpha) over n outcomes; alpha = +inf gives the
  // uniform-vector limit exactly
  std::vector<double> dirichlet_symmetric(double alpha, int n) {
    CTE_CHECK(n >= 1, "dirichlet: n must be >= 1");
    CTE_CHECK(alpha > 0.0, "dirichlet: alpha must be positive");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (!std::isfinite(alpha)) {
      for (auto& o : out) o = 1.0 / n;
      return out;
    }
    double sum = 0.0;
    do {
      sum = 0.0;
      for (auto& o : out) {
        o = gamma(alpha);
        sum += o;
      }
    } while (sum <= 0.0);  // all-underflow draw; retry
    for (auto& o : out) o /= sum;
    return out;
  }

  // CDF inversion; probs need not be normalized beyond validation tolerance
  int categorical(std::span<const double> probs) {
    double u = uniform01();
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = static_cast<int>(i);
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    CTE_CHECK(last_positive >= 0, "categorical: no positive mass");
    return last_positive;
  }

  // exponential-sum method; O(lambda) per draw
  int poisson(double lambda) {
    CTE_CHECK(lambda >= 0.0, "poisson: lambda must be >= 0");
    double s = 0.0;
    int k = 0;
    for (;;) {
      s += exponential();
      if (s > lambda) return k;
      ++k;
    }
  }

  int poisson_at_least(double lambda, int lo) {
    for (;;) {
      int n = poisson(lambda);
      if (n >= lo) return n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cte
