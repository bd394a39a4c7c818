#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sirvar {

// Stream ids mixed into derived seeds. Values are part of the on-disk
// reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
  kIllnessDuration = 1,
  kContactRate = 2,
  kInfectionProb = 3,
  kTopology = 16,
  kSimulation = 17,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation: a pure function of its three inputs, so a
/// replicate's stream does not depend on which worker runs it or when.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                           std::uint64_t stream) noexcept {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ (replicate * 0xd1b54a32d192ed03ULL);
  h = splitmix64(s);
  s = h ^ (stream * 0xaef17502108ef2d9ULL);
  return splitmix64(s);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                           Stream stream) noexcept {
  return derive_seed(master, replicate, static_cast<std::uint64_t>(stream));
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept { reseed(seed); }

  constexpr void reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift rejection.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

// Distributions are spelled out here rather than taken from <random> because
// the standard leaves their algorithms unspecified; saved runs must replay
// bit-for-bit on any toolchain.

/// Standard normal draw by the Box-Muller transform (no cached second value).
inline double standard_normal(Xoshiro256& rng) noexcept {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Poisson sampler. Knuth's product method below mean 30, otherwise the
/// PTRS transformed-rejection method (Hormann 1993).
class PoissonSampler {
 public:
  explicit PoissonSampler(double mean) : mean_(mean), exp_neg_mean_(std::exp(-mean)) {
    if (mean_ >= 30.0) {
      smu_ = std::sqrt(mean_);
      b_ = 0.931 + 2.53 * smu_;
      a_ = -0.059 + 0.02483 * b_;
      inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
      vr_ = 0.9277 - 3.6224 / (b_ - 2.0);
      log_mean_ = std::log(mean_);
    }
  }

  double mean() const noexcept { return mean_; }

  std::uint64_t operator()(Xoshiro256& rng) const noexcept {
    if (mean_ <= 0.0) return 0;
    if (mean_ < 30.0) {
      std::uint64_t k = 0;
      double prod = rng.uniform();
      while (prod > exp_neg_mean_) {
        ++k;
        prod *= rng.uniform();
      }
      return k;
    }
    for (;;) {
      const double u = rng.uniform() - 0.5;
      const double v = rng.uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a_ / us + b_) * u + mean_ + 0.43);
      if (us >= 0.07 && v <= vr_) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_) <=
          -mean_ + k * log_mean_ - std::lgamma(k + 1.0))
        return static_cast<std::uint64_t>(k);
    }
  }

 private:
  double mean_;
  double exp_neg_mean_;
  double smu_ = 0.0, b_ = 0.0, a_ = 0.0, inv_alpha_ = 0.0, vr_ = 0.0, log_mean_ = 0.0;
};

/// Number of Bernoulli(p) trials up to and including the first success
/// (support 1, 2, ...; mean 1/p).
inline std::uint64_t geometric_trials(Xoshiro256& rng, double p) noexcept {
  if (p >= 1.0) return 1;
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

}  // namespace sirvar
