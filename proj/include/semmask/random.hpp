#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace semmask {

// Seeded generator with a few convenience draws. Derived streams give
// per-sample randomness that does not depend on iteration order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed, 0); }
  Rng(std::uint64_t seed, std::uint64_t stream) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), 0x5eedu};
    engine_.seed(seq);
  }

  Rng derive(std::uint64_t stream) { return Rng(engine_(), stream); }

  // Uniform in the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = unit_(engine_);
    } while (u <= 0.0);
    return u;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return unit_(engine_) < p; }
  double gumbel() { return -std::log(-std::log(uniform())); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace semmask
