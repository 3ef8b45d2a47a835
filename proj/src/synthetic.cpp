#include "cfris/synthetic.hpp"

namespace cfris {
namespace {

CMat random_cmat(int rows, int cols, Rng& rng, double scale) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.cnormal();
  }
  return m;
}

}  // namespace

ScenarioConfig synthetic_config(int aps, int ues, int ris, int elements, int subcarriers,
                                int tx, int rx, int streams) {
  ScenarioConfig cfg;
  cfg.num_aps = aps;
  cfg.num_ues = ues;
  cfg.num_ris = ris;
  cfg.elements_per_ris = elements;
  cfg.num_subcarriers = subcarriers;
  cfg.tx_antennas = tx;
  cfg.rx_antennas = rx;
  cfg.streams_per_ue = streams;
  cfg.power_dbm = 0.0;   // 1 mW
  cfg.noise_mw = 0.1;    // unit-scale channels: moderate SNR
  cfg.validate();
  return cfg;
}

ChannelSet random_channels(const ScenarioConfig& cfg, Rng rng, double scale) {
  const int S = cfg.num_subcarriers;
  const int K = cfg.num_ues;
  const int rx = cfg.total_rx();
  const int qm = cfg.total_ris_elements();
  ChannelSet set;
  set.plan = SubcarrierPlan{S};
  set.num_ues = K;
  set.G.resize(S);
  set.H.assign(S, std::vector<CMat>(K));
  set.R.assign(S, std::vector<CMat>(K));
  for (int slot = 0; slot < S; ++slot) {
    set.G[slot] = random_cmat(rx, qm, rng, scale);
    for (int k = 0; k < K; ++k) {
      set.H[slot][k] = random_cmat(qm, cfg.tx_antennas, rng, scale);
      set.R[slot][k] = random_cmat(rx, cfg.tx_antennas, rng, scale);
    }
  }
  return set;
}

BlockVariables random_blocks(const ScenarioConfig& cfg, const AllocationMap& alloc, Rng rng) {
  const int S = alloc.plan().S;
  const int b = cfg.streams();
  BlockVariables blocks = BlockVariables::sized(S, cfg.num_ues);
  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int s : alloc.subcarriers_of(k)) {
      const int slot = alloc.plan().slot_of_index(s);
      CMat v = random_cmat(cfg.tx_antennas, b, rng, 1.0);
      const double target = cfg.power_mw() * rng.uniform(0.2, 1.0);
      v *= std::sqrt(target) / v.norm();
      blocks.v[slot][k] = std::move(v);
      blocks.u[slot][k] = random_cmat(cfg.total_rx(), b, rng, 1.0);
      const CMat w = random_cmat(b, b, rng, 1.0);
      blocks.w[slot][k] = hermitize(w * w.adjoint()) + CMat::Identity(b, b);
    }
  }
  return blocks;
}

}  // namespace cfris
