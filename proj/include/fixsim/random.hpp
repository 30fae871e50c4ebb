#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fixsim {

inline constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent random stream per sensor. Seeded from (run seed, stream
// name) so the draw sequence of one sensor never depends on how often any
// other sensor was sampled.
//
// std::mt19937_64 is bit-exact across standard libraries; the distribution
// code below is local because std::normal_distribution is not.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, "default") {}
  RandomStream(std::uint64_t seed, std::string_view name) : engine_(splitmix64(seed ^ fnv1a64(name))) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call, no cached pair).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sigma) { return sigma == 0.0 ? mean : mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fixsim
