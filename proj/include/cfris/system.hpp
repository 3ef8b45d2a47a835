#pragma once

#include <utility>
#include <vector>

#include "cfris/channel.hpp"
#include "cfris/impairments.hpp"
#include "cfris/linalg.hpp"
#include "cfris/parallel.hpp"
#include "cfris/rng.hpp"
#include "cfris/scenario.hpp"

namespace cfris {

// Reflect coefficients of all RIS elements, one complex number per element
// with |theta_l| <= 1 (passive surface, no amplification).
struct RisState {
  CVec theta;

  static RisState zeros(int qm);
  // Unit amplitude, i.i.d. uniform phases.
  static RisState unit_random(int qm, Rng rng);
  double max_modulus() const;
  double median_modulus() const;
};

// Optimization blocks for every served (UE, subcarrier) pair, slot-major.
// v: N_t x b precoders, u: C*N_r x b combiners, w: b x b Hermitian weights.
struct BlockVariables {
  std::vector<std::vector<CMat>> v, u, w;  // [S][K]; empty for unserved pairs

  static BlockVariables sized(int num_slots, int num_ues);
};

// Effective per-(UE, subcarrier) linear maps with hardware distortion:
//   hbar = G diag(theta) H + R
//   p1   = K1 hbar(s) D1 + K2 conj(hbar(-s)) D2     (carries the symbol)
//   p2   = K2 conj(hbar(-s)) conj(D1) + K1 hbar(s) conj(D2)
//          (carries the image-subcarrier leak)
// noise_gain(i) = |k1_i|^2 + |k2_i|^2 shapes the per-antenna noise floor.
struct OperatorSet {
  std::vector<std::vector<CMat>> hbar, p1, p2;  // [S][K], C*N_r x N_t
  RVec noise_gain;
};

CMat effective_channel(const ChannelSet& ch, const RisState& ris, int k, int s);

std::pair<CMat, CMat> build_p_operators(const ChannelSet& ch, const RisState& ris,
                                        const DistortionMatrices& dist, int k, int s);

// Builds hbar/p1/p2 for every UE on every subcarrier.
OperatorSet build_operators(const ChannelSet& ch, const RisState& ris,
                            const DistortionMatrices& dist, Exec exec = Exec::serial);

// Interference-plus-noise covariance seen by UE k on subcarrier s: other-UE
// signals through p1, everyone's image leak through p2, and the distorted
// noise floor. Hermitian positive definite whenever noise_mw > 0.
CMat interference_covariance(const BlockVariables& blocks, const OperatorSet& ops,
                             const AllocationMap& alloc, double noise_mw, int k, int s);

// log2 det(I + v^H p1^H J^{-1} p1 v), bits/s/Hz; combiner-optimal rate with
// interference and image cross-talk treated as noise.
double spectral_efficiency(const BlockVariables& blocks, const OperatorSet& ops,
                           const AllocationMap& alloc, double noise_mw, int k, int s);

double sum_spectral_efficiency(const BlockVariables& blocks, const OperatorSet& ops,
                               const AllocationMap& alloc, double noise_mw,
                               Exec exec = Exec::serial);

// Error covariance of the linear estimate u^H y against the sent symbols.
CMat mse_matrix(const BlockVariables& blocks, const OperatorSet& ops,
                const AllocationMap& alloc, double noise_mw, int k, int s);

// Rate achieved by the blocks' own combiners: sum of -log2 |E_k^s|.
double combiner_rate(const BlockVariables& blocks, const OperatorSet& ops,
                     const AllocationMap& alloc, double noise_mw,
                     Exec exec = Exec::serial);

// Sum over served pairs of Tr(w E) - log2 |w|. Per-pair terms are computed
// under the given policy and reduced in index order, so the value does not
// depend on the thread count.
double wmmse_objective(const BlockVariables& blocks, const OperatorSet& ops,
                       const AllocationMap& alloc, double noise_mw,
                       Exec exec = Exec::serial);

}  // namespace cfris
