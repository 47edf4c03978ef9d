#pragma once
#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace ssmvb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable stream derivation: identical (seed, window, method) always yields the
// same stream, independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t window,
                                 std::uint64_t method) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= (window + 0x9e3779b97f4a7c15ULL) * 0xd1342543de82ef95ULL;
  std::uint64_t b = splitmix64(s);
  s ^= (method + 0x2545f4914f6cdd1dULL) * 0x369dea0f31a53f85ULL;
  std::uint64_t c = splitmix64(s);
  return a ^ (b << 1) ^ (c >> 1);
}

// xoshiro256++ with SplitMix64 seeding. Self-contained so that every draw is
// bit-reproducible across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
    have_cached_normal_ = false;
    cached_normal_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0,1): 53-bit mantissa, never exactly 0 or 1.
  double uniform() {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    // Box-Muller; the second variate is cached.
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Marsaglia-Tsang; valid for any shape > 0, unit scale.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inverse-gamma with shape a, scale b: 1/X where X ~ Gamma(a, rate b).
  double inv_gamma(double a, double b) { return b / gamma(a); }

  // Index in [0, k) proportional to non-negative weights w.
  int categorical(const double* w, int k, double wsum) {
    double u = uniform() * wsum;
    for (int i = 0; i < k - 1; ++i) {
      u -= w[i];
      if (u <= 0.0) return i;
    }
    return k - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace ssmvb
