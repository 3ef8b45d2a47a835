#include "cfris/baselines.hpp"

#include <stdexcept>
#include <string>

namespace cfris {

Scheme scheme_from_string(std::string_view text) {
  if (text == "proposed") return Scheme::proposed;
  if (text == "mmse") return Scheme::mmse;
  if (text == "random" || text == "random_ris") return Scheme::random_ris;
  if (text == "blind") return Scheme::blind;
  throw ConfigError("scheme: expected proposed|mmse|random|blind, got '" + std::string(text) + "'");
}

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::proposed: return "proposed";
    case Scheme::mmse: return "mmse";
    case Scheme::random_ris: return "random";
    case Scheme::blind: return "blind";
  }
  return "?";
}

SchemeResult run_scheme(Scheme scheme, const ChannelSet& ch, const DistortionMatrices& true_dist,
                        const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const SolverOptions& opts, std::uint64_t realization) {
  const Rng root = Rng::from_seed(cfg.rng_seed).child(streams::kRealization, realization);
  const double noise = cfg.noise_power_mw();

  SchemeResult out;
  switch (scheme) {
    case Scheme::proposed: {
      out.state = outer_solve(ch, true_dist, cfg, alloc, opts, realization);
      break;
    }
    case Scheme::mmse: {
      SolverOptions o = opts;
      o.weights_identity = true;
      out.state = outer_solve(ch, true_dist, cfg, alloc, o, realization);
      break;
    }
    case Scheme::random_ris: {
      SolverOptions o = opts;
      o.optimize_ris = false;
      RisState frozen = RisState::unit_random(cfg.total_ris_elements(),
                                              root.child(streams::kThetaFrozen, 0));
      out.state = outer_solve_from(ch, true_dist, cfg, alloc, o, std::move(frozen));
      break;
    }
    case Scheme::blind: {
      SolverOptions o = opts;
      o.optimize_ris = false;
      // Same frozen draw as random_ris; with ideal hardware the two schemes
      // coincide exactly.
      RisState frozen = RisState::unit_random(cfg.total_ris_elements(),
                                              root.child(streams::kThetaFrozen, 0));
      const DistortionMatrices assumed = ideal_distortion(cfg);
      out.state = outer_solve_from(ch, assumed, cfg, alloc, o, std::move(frozen));
      break;
    }
  }

  // Every scheme is scored under the true impairments.
  const OperatorSet true_ops = build_operators(ch, out.state.ris, true_dist, opts.exec);
  out.sum_rate = sum_spectral_efficiency(out.state.blocks, true_ops, alloc, noise, opts.exec);
  out.combiner_sum_rate = combiner_rate(out.state.blocks, true_ops, alloc, noise, opts.exec);
  out.internal_sum_rate = out.state.final_sum_rate;
  return out;
}

}  // namespace cfris
