// Deterministic random number utilities.
//
// Two needs are served here. Monte-Carlo trials draw scenario parameters from
// a small sequential generator (RandomStream). Receiver noise instead comes
// from a stateless counter construction: each complex sample is a pure
// function of (key, sample index, antenna), so overlapping observation
// windows see bit-identical noise in their shared columns and any window can
// be re-synthesized in isolation.
#pragma once

#include <cmath>
#include <cstdint>

#include "toa/types.hpp"

namespace toa {

// splitmix64 finalizer. Good avalanche behaviour, cheap, and reproducible
// everywhere (no libm, no distribution objects).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Derives an independent child seed from a master seed and up to two
// coordinates (grid index, trial index). Used to give every trial its own
// stream so results do not depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t h = mix64(master + kGolden);
  h = mix64(h ^ (a + kGolden));
  h = mix64(h ^ (b + 0x3C6EF372FE94F82AULL));
  return h;
}

namespace detail {
// 53-bit mantissa draws.
constexpr double unit_open(std::uint64_t u) {  // [0, 1)
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}
constexpr double unit_pos(std::uint64_t u) {  // (0, 1]
  return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}
}  // namespace detail

// One unit-variance circularly-symmetric complex Gaussian draw, keyed by
// (key, sample, antenna). E|z|^2 = 1.
inline cplx noise_sample(std::uint64_t key, std::uint64_t sample,
                         std::uint32_t antenna) {
  std::uint64_t h = mix64(key ^ mix64(sample + kGolden));
  h = mix64(h ^ mix64((static_cast<std::uint64_t>(antenna) + 1) *
                      0xD1B54A32D192ED03ULL));
  const double u1 = detail::unit_pos(mix64(h + 0x8CB92BA72F3D8DD7ULL));
  const double u2 = detail::unit_open(mix64(h + 0x2545F4914F6CDD1DULL));
  const double r = std::sqrt(-std::log(u1));
  return std::polar(r, 2.0 * kPi * u2);
}

// Small sequential generator (splitmix64 chain) for scenario draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  double uniform() { return detail::unit_open(next_u64()); }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double exponential(double mean) {
    return -mean * std::log(detail::unit_pos(next_u64()));
  }

  double angle() { return uniform(0.0, 2.0 * kPi); }

  cplx unit_phasor() { return std::polar(1.0, angle()); }

 private:
  std::uint64_t state_;
};

}  // namespace toa
