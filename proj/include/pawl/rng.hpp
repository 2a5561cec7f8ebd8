#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pawl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. Streams derived from (seed, stream_id) are
// independent for distinct ids, so each chain can own one and results do
// not depend on execution order across chains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0xA3EC647659359ACDULL * (stream_id + 1);
    gen_.seed(splitmix64(s));
  }

  std::uint64_t bits() { return gen_(); }

  // uniform on [0,1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]
  double uniform_pos() { return 1.0 - uniform(); }

  // uniform integer on [0,n)
  std::uint64_t integer(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::integer: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  // standard normal via Box-Muller; consumes two uniforms per pair
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double exponential(double rate = 1.0) { return -std::log(uniform_pos()) / rate; }

  // Gamma(shape, rate) by Marsaglia-Tsang
  double gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0)
      throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
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
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pawl
