#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace smoothcond {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// (master, stream_index) names one reproducible random stream. Streams are
// derived by hashing, so trial i draws the same numbers no matter which
// thread runs it or in what order.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream_index = 0;

  // Sub-stream i of this stream.
  Seed child(std::uint64_t i) const noexcept {
    return Seed{master, splitmix64(stream_index ^ splitmix64(i + 0x632be59bd9b4e019ULL))};
  }

  std::uint64_t generator_seed() const noexcept {
    return splitmix64(master ^ splitmix64(stream_index));
  }

  friend bool operator==(const Seed&, const Seed&) = default;
};

// 64-bit Mersenne Twister plus hand-written uniform and normal transforms.
// std:: distributions are implementation-defined, so they are not used: the
// polar method below is the normal generator for every build.
class Rng {
 public:
  explicit Rng(Seed s) : engine_(s.generator_seed()) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal, Marsaglia polar method (pairs, second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(shape, 1), Marsaglia-Tsang squeeze; shape >= 1.
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
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

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smoothcond
