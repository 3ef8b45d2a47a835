#include "cfris/impairments.hpp"

#include <cmath>

namespace cfris {
namespace {

struct LevelRanges {
  double amp_half;    // amplitude in [1 - amp_half, 1 + amp_half]
  double phase_deg;   // phase in [-phase_deg, phase_deg]
};

LevelRanges ranges_for(IqiLevel level) {
  switch (level) {
    case IqiLevel::ideal: return {0.0, 0.0};
    case IqiLevel::level1: return {0.1, 10.0};
    case IqiLevel::level2: return {0.2, 20.0};
    case IqiLevel::level3: return {0.3, 30.0};
  }
  return {0.0, 0.0};
}

RVec draw_uniform(Rng& rng, int n, double lo, double hi) {
  RVec out(n);
  for (int i = 0; i < n; ++i) out(i) = rng.uniform(lo, hi);
  return out;
}

}  // namespace

IqiParams sample_iqi(IqiLevel level, const ScenarioConfig& cfg, std::uint64_t realization) {
  IqiParams p;
  p.amp_tx.resize(cfg.num_ues);
  p.phase_tx.resize(cfg.num_ues);
  p.amp_rx.resize(cfg.num_aps);
  p.phase_rx.resize(cfg.num_aps);
  if (level == IqiLevel::ideal) {
    for (int k = 0; k < cfg.num_ues; ++k) {
      p.amp_tx[k] = RVec::Ones(cfg.tx_antennas);
      p.phase_tx[k] = RVec::Zero(cfg.tx_antennas);
    }
    for (int c = 0; c < cfg.num_aps; ++c) {
      p.amp_rx[c] = RVec::Ones(cfg.rx_antennas);
      p.phase_rx[c] = RVec::Zero(cfg.rx_antennas);
    }
    return p;
  }
  const LevelRanges r = ranges_for(level);
  const double ph = deg2rad(r.phase_deg);
  const Rng root = Rng::from_seed(cfg.rng_seed).child(streams::kRealization, realization);
  for (int k = 0; k < cfg.num_ues; ++k) {
    Rng rng = root.child(streams::kIqiUe, static_cast<std::uint64_t>(k));
    p.amp_tx[k] = draw_uniform(rng, cfg.tx_antennas, 1.0 - r.amp_half, 1.0 + r.amp_half);
    p.phase_tx[k] = draw_uniform(rng, cfg.tx_antennas, -ph, ph);
  }
  for (int c = 0; c < cfg.num_aps; ++c) {
    Rng rng = root.child(streams::kIqiAp, static_cast<std::uint64_t>(c));
    p.amp_rx[c] = draw_uniform(rng, cfg.rx_antennas, 1.0 - r.amp_half, 1.0 + r.amp_half);
    p.phase_rx[c] = draw_uniform(rng, cfg.rx_antennas, -ph, ph);
  }
  return p;
}

IqiParams ideal_iqi(const ScenarioConfig& cfg) {
  return sample_iqi(IqiLevel::ideal, cfg, 0);
}

DistortionMatrices build_distortion(const IqiParams& params, const ScenarioConfig& cfg) {
  DistortionMatrices d;
  d.k1.resize(cfg.total_rx());
  for (int c = 0; c < cfg.num_aps; ++c) {
    for (int a = 0; a < cfg.rx_antennas; ++a) {
      const double amp = params.amp_rx[c](a);
      const double ph = params.phase_rx[c](a);
      d.k1(c * cfg.rx_antennas + a) = 0.5 * (1.0 + amp * std::exp(-kImag * ph));
    }
  }
  d.k2 = CVec::Ones(cfg.total_rx()) - d.k1.conjugate();
  d.d1.resize(cfg.num_ues);
  d.d2.resize(cfg.num_ues);
  for (int k = 0; k < cfg.num_ues; ++k) {
    CVec d1(cfg.tx_antennas);
    for (int a = 0; a < cfg.tx_antennas; ++a) {
      d1(a) = 0.5 * (1.0 + params.amp_tx[k](a) * std::exp(kImag * params.phase_tx[k](a)));
    }
    d.d1[k] = d1;
    d.d2[k] = CVec::Ones(cfg.tx_antennas) - d1.conjugate();
  }
  return d;
}

DistortionMatrices ideal_distortion(const ScenarioConfig& cfg) {
  return build_distortion(ideal_iqi(cfg), cfg);
}

}  // namespace cfris
