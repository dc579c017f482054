#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tnn {

/// Deterministic splitmix64 stream. Used instead of <random> engines so that
/// seeded runs are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive an independent stream for a named subsystem.
  static Rng derive(std::uint64_t seed, std::string_view tag, std::uint64_t salt = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ULL;
    Rng r(seed ^ h);
    r.next();
    r.state_ += salt * 0x9e3779b97f4a7c15ULL;
    r.next();
    return r;
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (fresh pair each call, second discarded
  /// to keep the stream position independent of call parity).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace tnn
