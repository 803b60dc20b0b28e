#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

#include "covop/common.hpp"

namespace covop {

// splitmix64 finalizer. Used both as a seed expander and as the stateless
// mix that derives independent streams from (master seed, path indices).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** (Blackman/Vigna). Small, fast, and fully portable, which is
// what the determinism contract needs; std:: distributions are not.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& w : state_) w = mix64(z++);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// One random stream plus the scalar samplers the models need. Streams are
// derived statelessly from (master, path...) so that any replicate can be
// regenerated in isolation and parallel schedules never change outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static std::uint64_t derive_seed(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t x : path) h = mix64(h ^ mix64(x));
    return h;
  }

  static Rng derive(std::uint64_t master,
                    std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
  }

  std::uint64_t next_u64() { return gen_.next(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe under log().
  double uniform01_open0() {
    return (static_cast<double>(gen_.next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ConfigError("uniform_below: n must be positive");
    while (true) {
      const std::uint64_t x = gen_.next();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
      const std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= static_cast<std::uint64_t>(-static_cast<std::int64_t>(n)) % n)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open0();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential() { return -std::log(uniform01_open0()); }

  // Marsaglia-Tsang; shape < 1 handled with the boost gamma(a+1)*U^(1/a).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ConfigError("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform01_open0();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_open0();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Number of Bernoulli(tau) trials until the first success (support 1,2,...).
  std::int64_t geometric_trials(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("geometric: tau must lie in (0,1)");
    const double u = uniform01();
    return 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log1p(-tau)));
  }

 private:
  Xoshiro256ss gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace covop
