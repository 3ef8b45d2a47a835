#pragma once

#include "cfris/system.hpp"

namespace cfris {

// Small self-checking instances with unit-scale i.i.d. Gaussian channels.
// Used by the `validate` CLI command and by the test oracles: the algebraic
// identities under test hold for arbitrary per-subcarrier matrices, and
// unit-scale entries keep the comparisons well conditioned.

ScenarioConfig synthetic_config(int aps, int ues, int ris, int elements, int subcarriers,
                                int tx, int rx, int streams);

// Independent CN(0, scale^2) entries per subcarrier; no multipath structure.
ChannelSet random_channels(const ScenarioConfig& cfg, Rng rng, double scale = 1.0);

// Feasible random blocks: precoders scaled to a uniformly drawn fraction of
// the power budget, random combiners, Hermitian-positive-definite weights.
BlockVariables random_blocks(const ScenarioConfig& cfg, const AllocationMap& alloc, Rng rng);

}  // namespace cfris
