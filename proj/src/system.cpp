#include "cfris/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfris {

RisState RisState::zeros(int qm) { return RisState{CVec::Zero(qm)}; }

RisState RisState::unit_random(int qm, Rng rng) {
  CVec theta(qm);
  for (int i = 0; i < qm; ++i) {
    theta(i) = std::exp(kImag * rng.uniform(-kPi, kPi));
  }
  return RisState{std::move(theta)};
}

double RisState::max_modulus() const {
  return theta.size() == 0 ? 0.0 : theta.cwiseAbs().maxCoeff();
}

double RisState::median_modulus() const {
  if (theta.size() == 0) return 0.0;
  std::vector<double> mags(theta.size());
  for (int i = 0; i < theta.size(); ++i) mags[i] = std::abs(theta(i));
  std::sort(mags.begin(), mags.end());
  const std::size_t n = mags.size();
  return n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

BlockVariables BlockVariables::sized(int num_slots, int num_ues) {
  BlockVariables b;
  b.v.assign(num_slots, std::vector<CMat>(num_ues));
  b.u.assign(num_slots, std::vector<CMat>(num_ues));
  b.w.assign(num_slots, std::vector<CMat>(num_ues));
  return b;
}

CMat effective_channel(const ChannelSet& ch, const RisState& ris, int k, int s) {
  const CMat& g = ch.g(s);
  const CMat& h = ch.h(s, k);
  const CMat& r = ch.r(s, k);
  if (g.cols() != h.rows() || ris.theta.size() != g.cols() || r.rows() != g.rows() ||
      r.cols() != h.cols()) {
    throw std::invalid_argument("effective_channel: dimension mismatch");
  }
  return g * ris.theta.asDiagonal() * h + r;
}

std::pair<CMat, CMat> build_p_operators(const ChannelSet& ch, const RisState& ris,
                                        const DistortionMatrices& dist, int k, int s) {
  const CMat hb = effective_channel(ch, ris, k, s);
  const CMat hb_img = effective_channel(ch, ris, k, -s).conjugate();
  const auto& d1 = dist.d1[k];
  const auto& d2 = dist.d2[k];
  CMat p1 = dist.k1.asDiagonal() * hb * d1.asDiagonal() +
            dist.k2.asDiagonal() * hb_img * d2.asDiagonal();
  CMat p2 = dist.k2.asDiagonal() * hb_img * d1.conjugate().asDiagonal() +
            dist.k1.asDiagonal() * hb * d2.conjugate().asDiagonal();
  return {std::move(p1), std::move(p2)};
}

OperatorSet build_operators(const ChannelSet& ch, const RisState& ris,
                            const DistortionMatrices& dist, Exec exec) {
  const int S = ch.plan.S;
  const int K = ch.num_ues;
  OperatorSet ops;
  ops.hbar.assign(S, std::vector<CMat>(K));
  ops.p1.assign(S, std::vector<CMat>(K));
  ops.p2.assign(S, std::vector<CMat>(K));
  ops.noise_gain = dist.k1.cwiseAbs2() + dist.k2.cwiseAbs2();
  parallel_for(exec, static_cast<std::int64_t>(S) * K, [&](std::int64_t idx) {
    const int slot = static_cast<int>(idx / K);
    const int k = static_cast<int>(idx % K);
    const int s = ch.plan.index_of_slot(slot);
    ops.hbar[slot][k] = effective_channel(ch, ris, k, s);
  });
  parallel_for(exec, static_cast<std::int64_t>(S) * K, [&](std::int64_t idx) {
    const int slot = static_cast<int>(idx / K);
    const int k = static_cast<int>(idx % K);
    const int mslot = ch.plan.slot_of_index(-ch.plan.index_of_slot(slot));
    const CMat hb_img = ops.hbar[mslot][k].conjugate();
    const CMat& hb = ops.hbar[slot][k];
    ops.p1[slot][k] = dist.k1.asDiagonal() * hb * dist.d1[k].asDiagonal() +
                      dist.k2.asDiagonal() * hb_img * dist.d2[k].asDiagonal();
    ops.p2[slot][k] = dist.k2.asDiagonal() * hb_img * dist.d1[k].conjugate().asDiagonal() +
                      dist.k1.asDiagonal() * hb * dist.d2[k].conjugate().asDiagonal();
  });
  return ops;
}

CMat interference_covariance(const BlockVariables& blocks, const OperatorSet& ops,
                             const AllocationMap& alloc, double noise_mw, int k, int s) {
  const auto& plan = alloc.plan();
  const int slot = plan.slot_of_index(s);
  const int mslot = plan.slot_of_index(-s);
  const int rx = static_cast<int>(ops.noise_gain.size());
  CMat j = CMat::Zero(rx, rx);
  j.diagonal() = (noise_mw * ops.noise_gain).cast<cxd>();
  for (int i : alloc.ues_on(s)) {
    if (i == k) continue;
    const CMat t = ops.p1[slot][i] * blocks.v[slot][i];
    j.noalias() += t * t.adjoint();
  }
  for (int i : alloc.ues_on(-s)) {
    const CMat t = ops.p2[slot][i] * blocks.v[mslot][i].conjugate();
    j.noalias() += t * t.adjoint();
  }
  return hermitize(j);
}

double spectral_efficiency(const BlockVariables& blocks, const OperatorSet& ops,
                           const AllocationMap& alloc, double noise_mw, int k, int s) {
  if (noise_mw <= 0.0) throw std::invalid_argument("spectral_efficiency: noise power must be > 0");
  const int slot = alloc.plan().slot_of_index(s);
  const CMat& v = blocks.v[slot][k];
  if (v.size() == 0) return 0.0;
  const CMat j = interference_covariance(blocks, ops, alloc, noise_mw, k, s);
  const CMat pv = ops.p1[slot][k] * v;
  const CMat m = CMat::Identity(v.cols(), v.cols()) + pv.adjoint() * solve_hermitian_psd(j, pv);
  return std::max(0.0, log2det_hermitian_pd(hermitize(m)));
}

namespace {

std::vector<std::pair<int, int>> served_ue_subcarriers(const AllocationMap& alloc) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < alloc.num_ues(); ++k) {
    for (int s : alloc.subcarriers_of(k)) pairs.emplace_back(k, s);
  }
  return pairs;
}

// Evaluate a per-pair term under `exec`, then reduce in index order.
template <typename Fn>
double ordered_pair_sum(const AllocationMap& alloc, Exec exec, Fn&& term) {
  const auto pairs = served_ue_subcarriers(alloc);
  std::vector<double> values(pairs.size());
  parallel_for(exec, static_cast<std::int64_t>(pairs.size()), [&](std::int64_t i) {
    values[i] = term(pairs[i].first, pairs[i].second);
  });
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

}  // namespace

double sum_spectral_efficiency(const BlockVariables& blocks, const OperatorSet& ops,
                               const AllocationMap& alloc, double noise_mw, Exec exec) {
  return ordered_pair_sum(alloc, exec, [&](int k, int s) {
    return spectral_efficiency(blocks, ops, alloc, noise_mw, k, s);
  });
}

CMat mse_matrix(const BlockVariables& blocks, const OperatorSet& ops,
                const AllocationMap& alloc, double noise_mw, int k, int s) {
  const int slot = alloc.plan().slot_of_index(s);
  const CMat& v = blocks.v[slot][k];
  const CMat& u = blocks.u[slot][k];
  const int b = static_cast<int>(v.cols());
  const CMat j = interference_covariance(blocks, ops, alloc, noise_mw, k, s);
  const CMat pv = ops.p1[slot][k] * v;
  const CMat upv = u.adjoint() * pv;
  CMat e = CMat::Identity(b, b) - upv - upv.adjoint() + upv * upv.adjoint() +
           u.adjoint() * j * u;
  return hermitize(e);
}

double combiner_rate(const BlockVariables& blocks, const OperatorSet& ops,
                     const AllocationMap& alloc, double noise_mw, Exec exec) {
  return ordered_pair_sum(alloc, exec, [&](int k, int s) {
    return -log2det_hermitian_pd(mse_matrix(blocks, ops, alloc, noise_mw, k, s));
  });
}

double wmmse_objective(const BlockVariables& blocks, const OperatorSet& ops,
                       const AllocationMap& alloc, double noise_mw, Exec exec) {
  return ordered_pair_sum(alloc, exec, [&](int k, int s) {
    const int slot = alloc.plan().slot_of_index(s);
    const CMat& w = blocks.w[slot][k];
    const CMat e = mse_matrix(blocks, ops, alloc, noise_mw, k, s);
    return (w * e).trace().real() - log2det_hermitian_pd(w);
  });
}

}  // namespace cfris
