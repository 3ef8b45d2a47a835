#pragma once

#include <cstdint>
#include <vector>

#include "cfris/linalg.hpp"
#include "cfris/rng.hpp"
#include "cfris/scenario.hpp"

namespace cfris {

// Per-chain amplitude and phase mismatch between the I and Q branches.
// Ideal hardware is amplitude 1, phase 0 on every antenna.
struct IqiParams {
  std::vector<RVec> amp_tx;    // per UE, length N_t
  std::vector<RVec> phase_tx;  // radians
  std::vector<RVec> amp_rx;    // per AP, length N_r
  std::vector<RVec> phase_rx;
};

// Severity levels draw per-antenna mismatches uniformly:
//   level1: amp U[0.9,1.1], phase U[-10deg,10deg]
//   level2: amp U[0.8,1.2], phase U[-20deg,20deg]
//   level3: amp U[0.7,1.3], phase U[-30deg,30deg]
// Draw order within a chain stream: all amplitudes, then all phases.
IqiParams sample_iqi(IqiLevel level, const ScenarioConfig& cfg, std::uint64_t realization);
IqiParams ideal_iqi(const ScenarioConfig& cfg);

// Direct/image mixing coefficients of the distorted transceive chains.
// All four operators are diagonal and stored as their diagonals:
//   k1 = (1 + amp_rx .* exp(-i phase_rx)) / 2, per AP, stacked to length C*N_r
//   k2 = 1 - conj(k1)
//   d1[k] = (1 + amp_tx .* exp(+i phase_tx)) / 2, length N_t
//   d2[k] = 1 - conj(d1[k])
// The identities k1 + conj(k2) = 1 and d1 + conj(d2) = 1 hold exactly.
struct DistortionMatrices {
  CVec k1, k2;               // length C*N_r
  std::vector<CVec> d1, d2;  // per UE, length N_t
};

DistortionMatrices build_distortion(const IqiParams& params, const ScenarioConfig& cfg);
DistortionMatrices ideal_distortion(const ScenarioConfig& cfg);

}  // namespace cfris
