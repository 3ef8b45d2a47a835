#include "cfris/wmmse.hpp"

#include <cmath>
#include <stdexcept>

namespace cfris {
namespace {

// Unit-modulus orthogonal columns: entry (j, l) = exp(-i 2 pi j l / n).
CMat dft_columns(int n, int cols) {
  CMat f(n, cols);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < cols; ++l) {
      f(j, l) = std::exp(-kImag * (2.0 * kPi * j * l / n));
    }
  }
  return f;
}

struct PairList {
  std::vector<std::pair<int, int>> slot_ue;  // served (slot, k) pairs
};

PairList served_pairs(const AllocationMap& alloc) {
  PairList list;
  const int S = alloc.plan().S;
  for (int slot = 0; slot < S; ++slot) {
    for (int k : alloc.ues_on(alloc.plan().index_of_slot(slot))) {
      list.slot_ue.emplace_back(slot, k);
    }
  }
  return list;
}

// Aggregate u w u^H over the UEs served on each subcarrier.
std::vector<CMat> combiner_weight_aggregates(const BlockVariables& blocks,
                                             const AllocationMap& alloc, int rx) {
  const int S = alloc.plan().S;
  std::vector<CMat> agg(S);
  for (int slot = 0; slot < S; ++slot) {
    CMat b = CMat::Zero(rx, rx);
    for (int k : alloc.ues_on(alloc.plan().index_of_slot(slot))) {
      b.noalias() += blocks.u[slot][k] * blocks.w[slot][k] * blocks.u[slot][k].adjoint();
    }
    agg[slot] = hermitize(b);
  }
  return agg;
}

PrecoderResult solve_precoder_with(const CMat& quad, const CMat& rhs, double power_budget,
                                   const SolverOptions& opts) {
  PrecoderResult out;
  const CMat eye = CMat::Identity(quad.rows(), quad.cols());
  out.v = solve_hermitian_psd(quad, rhs);
  if (out.v.squaredNorm() <= power_budget * (1.0 + 1e-12)) {
    out.multiplier = 0.0;
    return out;
  }
  double hi = 1.0;
  while (solve_hermitian_psd(quad + hi * eye, rhs).squaredNorm() > power_budget) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("solve_precoder: bisection failed to bracket");
  }
  double lo = 0.0;
  double pw = 0.0;
  for (int it = 0; it < opts.bisection_max_steps; ++it) {
    const double mid = 0.5 * (lo + hi);
    out.v = solve_hermitian_psd(quad + mid * eye, rhs);
    pw = out.v.squaredNorm();
    if (pw > power_budget) {
      lo = mid;
    } else {
      hi = mid;
    }
    out.multiplier = mid;
    const double gap = std::abs(pw - power_budget);
    if (pw <= power_budget * (1.0 + 1e-9) && gap <= opts.power_tol * power_budget &&
        out.multiplier * gap <= 1e-9 * power_budget) {
      return out;
    }
  }
  // Land on the feasible side of the final bracket.
  out.multiplier = hi;
  out.v = solve_hermitian_psd(quad + hi * eye, rhs);
  return out;
}

}  // namespace

BlockVariables initial_blocks(const ScenarioConfig& cfg, const AllocationMap& alloc) {
  const int S = alloc.plan().S;
  const int b = cfg.streams();
  BlockVariables blocks = BlockVariables::sized(S, cfg.num_ues);
  const double scale = std::sqrt(cfg.power_mw() / (cfg.tx_antennas * b));
  const CMat v0 = scale * dft_columns(cfg.tx_antennas, b);
  for (int k = 0; k < cfg.num_ues; ++k) {
    for (int s : alloc.subcarriers_of(k)) {
      const int slot = alloc.plan().slot_of_index(s);
      blocks.v[slot][k] = v0;
      blocks.u[slot][k] = CMat::Zero(cfg.total_rx(), b);
      blocks.w[slot][k] = CMat::Identity(b, b);
    }
  }
  return blocks;
}

void update_combiners(BlockVariables& blocks, const OperatorSet& ops,
                      const AllocationMap& alloc, double noise_mw, Exec exec) {
  const PairList pairs = served_pairs(alloc);
  parallel_for(exec, static_cast<std::int64_t>(pairs.slot_ue.size()), [&](std::int64_t i) {
    const auto [slot, k] = pairs.slot_ue[i];
    const int s = alloc.plan().index_of_slot(slot);
    const CMat j = interference_covariance(blocks, ops, alloc, noise_mw, k, s);
    const CMat pv = ops.p1[slot][k] * blocks.v[slot][k];
    blocks.u[slot][k] = solve_hermitian_psd(pv * pv.adjoint() + j, pv);
  });
}

void update_weights(BlockVariables& blocks, const OperatorSet& ops,
                    const AllocationMap& alloc, Exec exec) {
  const PairList pairs = served_pairs(alloc);
  parallel_for(exec, static_cast<std::int64_t>(pairs.slot_ue.size()), [&](std::int64_t i) {
    const auto [slot, k] = pairs.slot_ue[i];
    const CMat upv = blocks.u[slot][k].adjoint() * ops.p1[slot][k] * blocks.v[slot][k];
    const int b = static_cast<int>(upv.rows());
    const CMat eo = hermitize(CMat::Identity(b, b) - upv);
    blocks.w[slot][k] = hermitize(solve_hermitian_psd(eo, CMat::Identity(b, b)));
  });
}

PrecoderResult solve_precoder(const BlockVariables& blocks, const OperatorSet& ops,
                              const AllocationMap& alloc, double power_budget, int k, int s,
                              const SolverOptions& opts) {
  const auto& plan = alloc.plan();
  const int slot = plan.slot_of_index(s);
  const int mslot = plan.slot_of_index(-s);
  const int rx = static_cast<int>(ops.noise_gain.size());
  CMat bs = CMat::Zero(rx, rx);
  for (int i : alloc.ues_on(s)) {
    bs.noalias() += blocks.u[slot][i] * blocks.w[slot][i] * blocks.u[slot][i].adjoint();
  }
  CMat bm = CMat::Zero(rx, rx);
  for (int i : alloc.ues_on(-s)) {
    bm.noalias() += blocks.u[mslot][i] * blocks.w[mslot][i] * blocks.u[mslot][i].adjoint();
  }
  const CMat& p1 = ops.p1[slot][k];
  const CMat& p2m = ops.p2[mslot][k];  // leak of v_k^s into the image subcarrier
  CMat quad = p1.adjoint() * bs * p1 + (p2m.adjoint() * bm * p2m).conjugate();
  const CMat rhs = p1.adjoint() * blocks.u[slot][k] * blocks.w[slot][k];
  return solve_precoder_with(hermitize(quad), rhs, power_budget, opts);
}

void update_precoders(BlockVariables& blocks, const OperatorSet& ops,
                      const AllocationMap& alloc, double power_budget,
                      const SolverOptions& opts,
                      std::vector<std::vector<double>>& multipliers, Exec exec) {
  const auto& plan = alloc.plan();
  const int rx = static_cast<int>(ops.noise_gain.size());
  const std::vector<CMat> agg = combiner_weight_aggregates(blocks, alloc, rx);
  const PairList pairs = served_pairs(alloc);
  // The precoder subproblems decouple across (k, s) once the combiners and
  // weights are fixed, so one pass is the exact joint minimizer.
  parallel_for(exec, static_cast<std::int64_t>(pairs.slot_ue.size()), [&](std::int64_t i) {
    const auto [slot, k] = pairs.slot_ue[i];
    const int s = plan.index_of_slot(slot);
    const int mslot = plan.slot_of_index(-s);
    const CMat& p1 = ops.p1[slot][k];
    const CMat& p2m = ops.p2[mslot][k];
    CMat quad = p1.adjoint() * agg[slot] * p1 +
                (p2m.adjoint() * agg[mslot] * p2m).conjugate();
    const CMat rhs = p1.adjoint() * blocks.u[slot][k] * blocks.w[slot][k];
    PrecoderResult res = solve_precoder_with(hermitize(quad), rhs, power_budget, opts);
    blocks.v[slot][k] = std::move(res.v);
    multipliers[slot][k] = res.multiplier;
  });
}

SolverState outer_solve_from(const ChannelSet& ch, const DistortionMatrices& dist,
                             const ScenarioConfig& cfg, const AllocationMap& alloc,
                             const SolverOptions& opts, RisState theta0) {
  const int S = alloc.plan().S;
  const double noise = cfg.noise_power_mw();
  const double budget = cfg.power_mw();

  SolverState state;
  state.ris = std::move(theta0);
  if (state.ris.max_modulus() > 1.0 + 1e-9) {
    throw std::invalid_argument("outer_solve: initial theta violates the modulus constraint");
  }
  // Unit-amplitude draws can round a hair above one; pull them back in.
  for (int i = 0; i < state.ris.theta.size(); ++i) {
    const double m = std::abs(state.ris.theta(i));
    if (m > 1.0) state.ris.theta(i) /= m;
  }
  state.blocks = initial_blocks(cfg, alloc);
  state.multipliers.assign(S, std::vector<double>(cfg.num_ues, 0.0));

  OperatorSet ops = build_operators(ch, state.ris, dist, opts.exec);
  update_combiners(state.blocks, ops, alloc, noise, opts.exec);
  if (!opts.weights_identity) update_weights(state.blocks, ops, alloc, opts.exec);
  state.initial_objective = wmmse_objective(state.blocks, ops, alloc, noise, opts.exec);

  auto block_stats = [&](IterationTrace& t) {
    for (int k = 0; k < cfg.num_ues; ++k) {
      for (int s : alloc.subcarriers_of(k)) {
        const int slot = alloc.plan().slot_of_index(s);
        const double pw = state.blocks.v[slot][k].squaredNorm();
        t.max_power_ratio = std::max(t.max_power_ratio, pw / budget);
        t.max_slackness = std::max(
            t.max_slackness, state.multipliers[slot][k] * std::abs(pw - budget) / budget);
      }
    }
    t.max_theta_modulus = state.ris.max_modulus();
  };

  double prev_obj = state.initial_objective;
  for (int iter = 0; iter < opts.max_outer_iters; ++iter) {
    IterationTrace t;
    update_combiners(state.blocks, ops, alloc, noise, opts.exec);
    t.obj_after_u = wmmse_objective(state.blocks, ops, alloc, noise, opts.exec);
    if (opts.weights_identity) {
      t.obj_after_w = t.obj_after_u;
      t.sum_log2w = 0.0;
    } else {
      update_weights(state.blocks, ops, alloc, opts.exec);
      t.obj_after_w = wmmse_objective(state.blocks, ops, alloc, noise, opts.exec);
      double lw = 0.0;
      for (int k = 0; k < cfg.num_ues; ++k) {
        for (int s : alloc.subcarriers_of(k)) {
          lw += log2det_hermitian_pd(state.blocks.w[alloc.plan().slot_of_index(s)][k]);
        }
      }
      t.sum_log2w = lw;
    }
    t.sum_rate_after_w = sum_spectral_efficiency(state.blocks, ops, alloc, noise, opts.exec);

    update_precoders(state.blocks, ops, alloc, budget, opts, state.multipliers, opts.exec);
    t.obj_after_v = wmmse_objective(state.blocks, ops, alloc, noise, opts.exec);

    if (opts.optimize_ris && state.ris.theta.size() > 0) {
      const RisCouplingSet coupling = build_coupling(state.blocks, ch, dist, alloc, opts.exec);
      const QuadraticForm qf = build_real_qcqp(coupling);
      if (opts.certify_ris) {
        t.ris_min_eig = min_eigenvalue_symmetric(qf.delta_sym);
        t.ris_delta_fro = qf.delta.norm();
      }
      const RisSolveResult res =
          solve_ris(qf, theta_to_nu(state.ris.theta), opts.ris_tol, opts.ris_max_sweeps);
      state.ris.theta = nu_to_theta(res.nu);
      t.ris_sweeps = res.sweeps;
      t.ris_converged = res.converged;
      ops = build_operators(ch, state.ris, dist, opts.exec);
    }
    t.obj_after_theta = wmmse_objective(state.blocks, ops, alloc, noise, opts.exec);
    t.sum_rate = sum_spectral_efficiency(state.blocks, ops, alloc, noise, opts.exec);
    block_stats(t);
    state.trace.push_back(t);
    state.iterations = iter + 1;

    const double cur = t.obj_after_theta;
    if (std::abs(prev_obj - cur) <= opts.outer_tol * (1.0 + std::abs(cur))) {
      state.converged = true;
      break;
    }
    prev_obj = cur;
  }

  state.final_objective = state.trace.empty() ? state.initial_objective
                                              : state.trace.back().obj_after_theta;
  state.final_sum_rate = sum_spectral_efficiency(state.blocks, ops, alloc, noise, opts.exec);
  return state;
}

SolverState outer_solve(const ChannelSet& ch, const DistortionMatrices& dist,
                        const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const SolverOptions& opts, std::uint64_t realization) {
  const Rng root = Rng::from_seed(cfg.rng_seed).child(streams::kRealization, realization);
  RisState theta0 =
      RisState::unit_random(cfg.total_ris_elements(), root.child(streams::kThetaInit, 0));
  return outer_solve_from(ch, dist, cfg, alloc, opts, std::move(theta0));
}

}  // namespace cfris
