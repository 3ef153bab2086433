#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <utility>

namespace motionopt {

// SplitMix64-style counter generator (Stafford mix13 finalizer). Each
// (seed, id0, id1) triple keys an independent stream; outputs are pure
// functions of (key, counter), so any number of streams can be evaluated
// concurrently with results identical to sequential evaluation.
namespace rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id0, std::uint64_t id1) {
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ mix64(id0 + 0xD1B54A32D192ED03ull));
  k = mix64(k ^ mix64(id1 + 0x8CB92BA72F3D8DD7ull));
  return k;
}

}  // namespace rng

class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t id0, std::uint64_t id1)
      : key_(rng::stream_key(seed, id0, id1)) {}

  std::uint64_t next_u64() { return rng::mix64(key_ + (++counter_) * rng::kGolden); }

  // Uniform in (0, 1]; never 0, so logs are safe.
  double next_unit() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Box-Muller pair of independent standard normals; consumes exactly two
  // uniforms, keeping the counter advance fixed per call.
  std::pair<double, double> next_normal_pair() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace motionopt
