#pragma once

#include <string_view>

#include "cfris/wmmse.hpp"

namespace cfris {

// proposed    joint combiner/weight/precoder/reflect optimization
// mmse        weights pinned to identity, everything else as proposed
// random_ris  impairment-aware blocks, reflect coefficients drawn once and frozen
// blind       impairment-unaware solver on frozen random reflect coefficients;
//             rates are then evaluated under the true impairments
enum class Scheme { proposed, mmse, random_ris, blind };

Scheme scheme_from_string(std::string_view text);
const char* to_string(Scheme scheme);

struct SchemeResult {
  SolverState state;
  // Rates under the true impairment model, regardless of what the scheme
  // assumed internally. sum_rate is combiner-optimal; combiner_sum_rate uses
  // the scheme's own combiners (diagnostic).
  double sum_rate = 0.0;
  double combiner_sum_rate = 0.0;
  double internal_sum_rate = 0.0;  // the scheme's own model view
};

SchemeResult run_scheme(Scheme scheme, const ChannelSet& ch, const DistortionMatrices& true_dist,
                        const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const SolverOptions& opts, std::uint64_t realization);

}  // namespace cfris
