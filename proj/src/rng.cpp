#include "cfris/rng.hpp"

#include <cmath>

namespace cfris {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kInvSqrt2 = 0.70710678118654752440;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::from_seed(std::uint64_t master_seed) {
  return Rng(mix(master_seed + kGamma));
}

Rng Rng::child(std::uint64_t label, std::uint64_t index) const {
  // Derived from the stream identity alone, never from the draw position.
  std::uint64_t s = mix(key_ ^ (label * 0xD1B54A32D192ED03ull));
  s = mix(s ^ ((index + 1) * 0x8CB92BA72F3D8DD7ull));
  return Rng(s);
}

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix(key_ + counter_ * kGamma);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  // Box-Muller; u1 shifted away from zero so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::complex<double> Rng::cnormal() {
  const double re = normal();
  const double im = normal();
  return {re * kInvSqrt2, im * kInvSqrt2};
}

}  // namespace cfris
