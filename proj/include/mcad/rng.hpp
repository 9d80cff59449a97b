// Deterministic keyed random streams.
//
// Every stochastic quantity in the simulator (user drops, activity chains,
// pilots, channels, noise, quantizer dither-free draws, SE samples) pulls from
// its own stream keyed by (master seed, purpose tag, indices). Streams never
// depend on thread scheduling or generation order elsewhere, which is what
// makes trial-parallel runs bit-reproducible.
//
// std::normal_distribution is implementation-defined, so Gaussians are drawn
// with an explicit Box-Muller transform on top of a splitmix64 walk.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace mcad {

using cplx = std::complex<double>;

constexpr uint64_t fnv1a64(const char* s) {
  uint64_t h = 14695981039346656037ull;
  while (*s) {
    h ^= (uint64_t)(unsigned char)(*s++);
    h *= 1099511628211ull;
  }
  return h;
}

class Rng {
 public:
  Rng() : state_(0x9E3779B97F4A7C15ull) {}
  explicit Rng(uint64_t seed) : state_(mix(seed ^ 0x6A09E667F3BCC909ull)) {}

  // Key order matters; repeated keys give distinct streams.
  Rng& absorb(uint64_t k) {
    state_ = mix(state_ ^ mix(k + 0x9E3779B97F4A7C15ull));
    return *this;
  }

  static Rng keyed(uint64_t seed, uint64_t tag, uint64_t i0 = 0,
                   uint64_t i1 = 0, uint64_t i2 = 0) {
    Rng r(seed);
    r.absorb(tag).absorb(i0).absorb(i1).absorb(i2);
    return r;
  }

  static Rng keyed(uint64_t seed, const char* tag, uint64_t i0 = 0,
                   uint64_t i1 = 0, uint64_t i2 = 0) {
    return keyed(seed, fnv1a64(tag), i0, i1, i2);
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Strictly inside (0,1); never 0, so log(u) is always finite.
  double uniform() { return ((double)(next_u64() >> 11) + 0.5) * 0x1p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.28318530717958647692529 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // CN(0, var): independent real/imag parts with variance var/2 each.
  cplx cgaussian(double var) {
    double s = std::sqrt(0.5 * var);
    double re = gaussian();
    double im = gaussian();
    return cplx(s * re, s * im);
  }

  // Derive a fresh 64-bit sub-seed without perturbing this stream.
  static uint64_t sub_seed(uint64_t seed, uint64_t tag, uint64_t i0 = 0,
                           uint64_t i1 = 0) {
    return keyed(seed, tag, i0, i1).next_u64();
  }

  static uint64_t sub_seed(uint64_t seed, const char* tag, uint64_t i0 = 0,
                           uint64_t i1 = 0) {
    return sub_seed(seed, fnv1a64(tag), i0, i1);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// One tag per purpose so modules can never collide on a stream.
namespace streams {
inline constexpr uint64_t kNetUser = fnv1a64("net.user");
inline constexpr uint64_t kNet = fnv1a64("net.trial");
inline constexpr uint64_t kTraffic = fnv1a64("traffic.user");
inline constexpr uint64_t kTrafficTrial = fnv1a64("traffic.trial");
inline constexpr uint64_t kPilot = fnv1a64("phy.pilot");
inline constexpr uint64_t kPilotTrial = fnv1a64("phy.pilot.trial");
inline constexpr uint64_t kChannel = fnv1a64("phy.channel");
inline constexpr uint64_t kChannelTrial = fnv1a64("phy.channel.trial");
inline constexpr uint64_t kNoise = fnv1a64("phy.noise");
inline constexpr uint64_t kSe = fnv1a64("se.samples");
inline constexpr uint64_t kOracle = fnv1a64("oracle.instance");
inline constexpr uint64_t kTest = fnv1a64("test.fixture");
}  // namespace streams

}  // namespace mcad
