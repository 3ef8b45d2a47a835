#pragma once

#include <cstdint>
#include <vector>

#include "cfris/ris.hpp"
#include "cfris/system.hpp"

namespace cfris {

struct SolverOptions {
  int max_outer_iters = 150;
  double outer_tol = 1e-7;      // relative objective change between iterations
  double power_tol = 1e-10;     // relative tolerance on ||v||_F^2 in the bisection
  int bisection_max_steps = 200;
  double ris_tol = 1e-8;        // relative objective change per BCD sweep
  int ris_max_sweeps = 500;
  bool optimize_ris = true;     // false freezes theta at its initial value
  bool weights_identity = false;  // keep w = I (plain MMSE)
  bool certify_ris = true;      // record the convexity margin of each theta subproblem
  Exec exec = Exec::serial;
};

struct IterationTrace {
  // Objective after each block update, in update order.
  double obj_after_u = 0.0, obj_after_w = 0.0, obj_after_v = 0.0, obj_after_theta = 0.0;
  double sum_rate = 0.0;          // total spectral efficiency at end of iteration
  double sum_log2w = 0.0;         // sum of log2 |w| right after the weight update
  double sum_rate_after_w = 0.0;  // total spectral efficiency at the same point
  double max_power_ratio = 0.0;   // max ||v||_F^2 / p over served pairs
  double max_slackness = 0.0;     // max multiplier * | ||v||^2 - p | / p
  double max_theta_modulus = 0.0;
  int ris_sweeps = 0;
  bool ris_converged = true;
  double ris_min_eig = 0.0;    // min eigenvalue of (delta + delta^T)/2
  double ris_delta_fro = 0.0;  // ||delta||_F of the same subproblem
};

struct SolverState {
  BlockVariables blocks;
  RisState ris;
  std::vector<std::vector<double>> multipliers;  // [S][K] power-constraint duals
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double final_sum_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationTrace> trace;
};

// Deterministic feasible start: precoders are scaled truncated-DFT matrices
// (orthogonal unit-modulus columns, power constraint tight); combiners and
// weights then follow from their closed forms.
BlockVariables initial_blocks(const ScenarioConfig& cfg, const AllocationMap& alloc);

void update_combiners(BlockVariables& blocks, const OperatorSet& ops,
                      const AllocationMap& alloc, double noise_mw, Exec exec);

// Requires freshly updated combiners; then w = (I - u^H p1 v)^{-1} is the
// inverse MSE and has eigenvalues >= 1.
void update_weights(BlockVariables& blocks, const OperatorSet& ops,
                    const AllocationMap& alloc, Exec exec);

struct PrecoderResult {
  CMat v;
  double multiplier = 0.0;  // power-constraint dual
};

// Returns the multiplier-free (minimum-norm) solution when it meets the
// power budget, otherwise bisects the dual multiplier until the budget is
// tight. The quadratic coefficient includes both the same-subcarrier term
// and the image-subcarrier leak term.
PrecoderResult solve_precoder(const BlockVariables& blocks, const OperatorSet& ops,
                              const AllocationMap& alloc, double power_budget, int k, int s,
                              const SolverOptions& opts);

void update_precoders(BlockVariables& blocks, const OperatorSet& ops,
                      const AllocationMap& alloc, double power_budget,
                      const SolverOptions& opts,
                      std::vector<std::vector<double>>& multipliers, Exec exec);

// Round-robin block coordinate descent: combiners, weights, precoders,
// reflect coefficients, iterated until the relative objective change falls
// below outer_tol. The objective is nonincreasing after every block update.
SolverState outer_solve_from(const ChannelSet& ch, const DistortionMatrices& dist,
                             const ScenarioConfig& cfg, const AllocationMap& alloc,
                             const SolverOptions& opts, RisState theta0);

// theta0 drawn with unit amplitude and uniform phases from the realization's
// dedicated stream.
SolverState outer_solve(const ChannelSet& ch, const DistortionMatrices& dist,
                        const ScenarioConfig& cfg, const AllocationMap& alloc,
                        const SolverOptions& opts, std::uint64_t realization);

}  // namespace cfris
