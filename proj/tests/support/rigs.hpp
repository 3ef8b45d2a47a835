#pragma once

// Hand-built miniature systems with known closed-form behavior.

#include "cfris/synthetic.hpp"
#include "cfris/system.hpp"

namespace cfris::testing {

// Fully scalar link: one AP, one UE, one reflect element, two subcarriers,
// unit noise, 1 mW budget. Channel entries are set directly.
struct ScalarRig {
  ScenarioConfig cfg;
  ChannelSet ch;
  AllocationMap alloc;

  ScalarRig(cxd g, cxd h, cxd r) : cfg(synthetic_config(1, 1, 1, 1, 2, 1, 1, 1)) {
    cfg.noise_mw = 1.0;
    cfg.power_dbm = 0.0;
    ch.plan = SubcarrierPlan{2};
    ch.num_ues = 1;
    ch.G.assign(2, CMat::Constant(1, 1, g));
    ch.H.assign(2, {CMat::Constant(1, 1, h)});
    ch.R.assign(2, {CMat::Constant(1, 1, r)});
    alloc = AllocationMap::full(cfg);
  }
};

inline BlockVariables scalar_blocks(cxd v, cxd u, cxd w) {
  BlockVariables b = BlockVariables::sized(2, 1);
  for (int slot = 0; slot < 2; ++slot) {
    b.v[slot][0] = CMat::Constant(1, 1, v);
    b.u[slot][0] = CMat::Constant(1, 1, u);
    b.w[slot][0] = CMat::Constant(1, 1, w);
  }
  return b;
}

}  // namespace cfris::testing
