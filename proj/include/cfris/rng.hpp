#pragma once

#include <complex>
#include <cstdint>

namespace cfris {

// Splittable counter-style PRNG built on the SplitMix64 mixer.
//
// Every random quantity in an experiment comes from a stream addressed by a
// path of (label, index) pairs below the master seed. Deriving a child is a
// pure function of the parent state, so streams are order-independent:
// realization r sees the same draws no matter which thread produces it or
// what was drawn before. Within a stream, draw order is part of the contract
// and is documented at each call site.
class Rng {
 public:
  static Rng from_seed(std::uint64_t master_seed);

  // Child stream addressed by (label, index); does not advance this stream.
  Rng child(std::uint64_t label, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // N(0, 1)
  std::complex<double> cnormal();          // circular CN(0, 1)

 private:
  explicit Rng(std::uint64_t key) : key_(key) {}
  std::uint64_t key_ = 0;      // stream identity; children derive from this
  std::uint64_t counter_ = 0;  // draws taken from this stream
};

// Stream labels. Values are arbitrary but frozen: changing them changes
// every seeded experiment.
namespace streams {
inline constexpr std::uint64_t kRealization = 0x01;
inline constexpr std::uint64_t kUeDrop = 0x10;
inline constexpr std::uint64_t kLinkUeRis = 0x11;
inline constexpr std::uint64_t kLinkRisAp = 0x12;
inline constexpr std::uint64_t kLinkUeAp = 0x13;
inline constexpr std::uint64_t kIqiUe = 0x20;
inline constexpr std::uint64_t kIqiAp = 0x21;
inline constexpr std::uint64_t kThetaInit = 0x30;
inline constexpr std::uint64_t kThetaFrozen = 0x31;
}  // namespace streams

}  // namespace cfris
