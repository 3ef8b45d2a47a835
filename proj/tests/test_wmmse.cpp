#include <cmath>

#include "cfris/wmmse.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/rigs.hpp"

using namespace cfris;
using testing::ScalarRig;
using testing::scalar_blocks;

namespace {

ScenarioConfig desk_cfg(int ues = 4) {
  ScenarioConfig cfg;
  cfg.num_aps = 2;
  cfg.num_ues = ues;
  cfg.num_ris = 2;
  cfg.elements_per_ris = 16;
  cfg.num_subcarriers = 4;
  cfg.tx_antennas = 2;
  cfg.rx_antennas = 4;
  cfg.iqi_level = IqiLevel::level3;
  cfg.power_dbm = 0.0;
  cfg.rng_seed = 2024;
  return cfg;
}

struct Run {
  ScenarioConfig cfg;
  AllocationMap alloc;
  ChannelSet ch;
  DistortionMatrices dist;
  SolverState state;
};

Run solve_desk(const ScenarioConfig& cfg, const SolverOptions& opts, std::uint64_t realization) {
  Run run{cfg, AllocationMap::full(cfg), assemble_channels(cfg, realization, opts.exec),
          build_distortion(sample_iqi(cfg.iqi_level, cfg, realization), cfg), {}};
  run.state = outer_solve(run.ch, run.dist, run.cfg, run.alloc, opts, realization);
  return run;
}

void check_monotone(const SolverState& st, double slack = 1e-9) {
  double prev = st.initial_objective;
  for (const IterationTrace& t : st.trace) {
    for (double v : {t.obj_after_u, t.obj_after_w, t.obj_after_v, t.obj_after_theta}) {
      CHECK(v <= prev + slack * (1.0 + std::abs(prev)));
      prev = v;
    }
  }
}

}  // namespace

TEST_CASE("initial precoders are power tight with orthogonal columns") {
  const ScenarioConfig cfg = desk_cfg();
  const AllocationMap alloc = AllocationMap::full(cfg);
  const BlockVariables blocks = initial_blocks(cfg, alloc);
  const CMat& v = blocks.v[0][0];
  CHECK(v.rows() == cfg.tx_antennas);
  CHECK(v.cols() == cfg.streams());
  CHECK(v.squaredNorm() == doctest::Approx(cfg.power_mw()).epsilon(1e-12));
  const CMat gram = v.adjoint() * v;
  CHECK((gram - (cfg.power_mw() / cfg.streams()) *
                    CMat::Identity(cfg.streams(), cfg.streams()))
            .norm() < 1e-12);
}

TEST_CASE("combiner update scalar case and zero case") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const OperatorSet ops = build_operators(rig.ch, RisState::zeros(1), ideal_distortion(rig.cfg));
  BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(0, 0), cxd(1, 0));
  update_combiners(blocks, ops, rig.alloc, 1.0, Exec::serial);
  CHECK(std::abs(blocks.u[0][0](0, 0) - cxd(0.5, 0)) < 1e-14);

  BlockVariables zero = scalar_blocks(cxd(0, 0), cxd(7, 0), cxd(1, 0));
  update_combiners(zero, ops, rig.alloc, 1.0, Exec::serial);
  CHECK(zero.u[0][0].norm() == 0.0);
}

TEST_CASE("combiner update minimizes the weighted mse") {
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 3, 2, 2, 3, 2);
  Rng rng = Rng::from_seed(73);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 0), cfg);
  const OperatorSet ops =
      build_operators(ch, RisState::unit_random(cfg.total_ris_elements(), rng.child(2)), dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  const double noise = cfg.noise_power_mw();

  for (int trial = 0; trial < 20; ++trial) {
    BlockVariables blocks = random_blocks(cfg, alloc, rng.child(100 + trial));
    update_combiners(blocks, ops, alloc, noise, Exec::serial);
    const int k = trial % 2, s = (trial % 4) < 2 ? 1 : -1;
    const int slot = alloc.plan().slot_of_index(s);
    const CMat e = mse_matrix(blocks, ops, alloc, noise, k, s);
    const double base = (blocks.w[slot][k] * e).trace().real();
    for (int p = 0; p < 3; ++p) {
      BlockVariables perturbed = blocks;
      CMat delta(perturbed.u[slot][k].rows(), perturbed.u[slot][k].cols());
      for (int r = 0; r < delta.rows(); ++r) {
        for (int c = 0; c < delta.cols(); ++c) delta(r, c) = rng.cnormal();
      }
      perturbed.u[slot][k] += 1e-3 * delta / delta.norm();
      const CMat ep = mse_matrix(perturbed, ops, alloc, noise, k, s);
      const double moved = (perturbed.w[slot][k] * ep).trace().real();
      CHECK(moved >= base - 1e-12 * (1.0 + std::abs(base)));
    }
  }
}

TEST_CASE("weight update scalar case, zero case, and spectral floor") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const OperatorSet ops = build_operators(rig.ch, RisState::zeros(1), ideal_distortion(rig.cfg));
  BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(0.5, 0), cxd(1, 0));
  update_weights(blocks, ops, rig.alloc, Exec::serial);
  CHECK(std::abs(blocks.w[0][0](0, 0) - cxd(2, 0)) < 1e-12);

  BlockVariables zero = scalar_blocks(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  update_weights(zero, ops, rig.alloc, Exec::serial);
  CHECK(std::abs(zero.w[0][0](0, 0) - cxd(1, 0)) < 1e-14);

  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 3, 2, 2, 3, 2);
  Rng rng = Rng::from_seed(79);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level2, cfg, 0), cfg);
  const OperatorSet ops2 =
      build_operators(ch, RisState::unit_random(cfg.total_ris_elements(), rng.child(2)), dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  BlockVariables rb = random_blocks(cfg, alloc, rng.child(3));
  update_combiners(rb, ops2, alloc, cfg.noise_power_mw(), Exec::serial);
  update_weights(rb, ops2, alloc, Exec::serial);
  for (int slot = 0; slot < 2; ++slot) {
    for (int k = 0; k < 2; ++k) {
      const CMat wm = rb.w[slot][k];
      CHECK((wm - wm.adjoint()).norm() < 1e-10 * wm.norm());
      CHECK(min_eigenvalue_hermitian(wm - CMat::Identity(wm.rows(), wm.cols())) >= -1e-9);
    }
  }
}

TEST_CASE("precoder update leaves ample budgets unconstrained") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const OperatorSet ops = build_operators(rig.ch, RisState::zeros(1), ideal_distortion(rig.cfg));
  BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(2, 0), cxd(0.5, 0));
  SolverOptions opts;
  const PrecoderResult res = solve_precoder(blocks, ops, rig.alloc, 1e9, 0, 1, opts);
  CHECK(res.multiplier == 0.0);
  CHECK(std::abs(res.v(0, 0) - cxd(0.5, 0)) < 1e-12);  // (uwu)^{-1} u w = 1/2
}

TEST_CASE("precoder bisection reproduces the scalar kkt solution") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const OperatorSet ops = build_operators(rig.ch, RisState::zeros(1), ideal_distortion(rig.cfg));
  // u w u^H = 2, u w = 1: quadratic 2, linear 1
  BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(2, 0), cxd(0.5, 0));
  SolverOptions opts;
  const PrecoderResult res = solve_precoder(blocks, ops, rig.alloc, 0.01, 0, 1, opts);
  CHECK(std::abs(res.v(0, 0)) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(res.multiplier == doctest::Approx(8.0).epsilon(1e-6));
  // kkt residuals
  const double pw = res.v.squaredNorm();
  CHECK(pw <= 0.01 * (1.0 + 1e-9));
  CHECK(res.multiplier * std::abs(pw - 0.01) <= 1e-6 * 0.01);
}

TEST_CASE("precoder update minimizes the objective over the power ball") {
  // Level-3 impairments so the image-subcarrier quadratic term is material.
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 3, 4, 2, 3, 2);
  Rng rng = Rng::from_seed(83);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 0), cfg);
  const OperatorSet ops =
      build_operators(ch, RisState::unit_random(cfg.total_ris_elements(), rng.child(2)), dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  const double noise = cfg.noise_power_mw();
  const double budget = cfg.power_mw();
  SolverOptions opts;

  BlockVariables blocks = random_blocks(cfg, alloc, rng.child(3));
  update_combiners(blocks, ops, alloc, noise, Exec::serial);
  update_weights(blocks, ops, alloc, Exec::serial);
  std::vector<std::vector<double>> mult(cfg.num_subcarriers,
                                        std::vector<double>(cfg.num_ues, 0.0));
  update_precoders(blocks, ops, alloc, budget, opts, mult, Exec::serial);
  const double base = wmmse_objective(blocks, ops, alloc, noise);

  for (int trial = 0; trial < 30; ++trial) {
    const int k = trial % cfg.num_ues;
    const int s = alloc.subcarriers_of(k)[trial % cfg.num_subcarriers];
    const int slot = alloc.plan().slot_of_index(s);
    BlockVariables perturbed = blocks;
    CMat delta(cfg.tx_antennas, cfg.streams());
    for (int r = 0; r < delta.rows(); ++r) {
      for (int c = 0; c < delta.cols(); ++c) delta(r, c) = rng.cnormal();
    }
    CMat cand = blocks.v[slot][k] + 1e-2 * std::sqrt(budget) * delta / delta.norm();
    const double pw = cand.squaredNorm();
    if (pw > budget) cand *= std::sqrt(budget / pw);
    perturbed.v[slot][k] = cand;
    CHECK(wmmse_objective(perturbed, ops, alloc, noise) >=
          base - 1e-10 * (1.0 + std::abs(base)));
  }
}

TEST_CASE("solver trace is monotone, feasible, and satisfies the rate identity") {
  for (std::uint64_t r : {0ull, 1ull, 2ull}) {
    SolverOptions opts;
    opts.max_outer_iters = 25;
    const Run run = solve_desk(desk_cfg(), opts, r);
    check_monotone(run.state);
    for (const IterationTrace& t : run.state.trace) {
      CHECK(t.max_power_ratio <= 1.0 + 1e-9);
      CHECK(t.max_theta_modulus <= 1.0 + 1e-9);
      CHECK(t.max_slackness <= 1e-6);
      CHECK(std::abs(t.sum_log2w - t.sum_rate_after_w) <=
            1e-8 * (1.0 + std::abs(t.sum_rate_after_w)));
      CHECK(t.ris_min_eig >= -1e-8 * t.ris_delta_fro);
    }
  }
}

TEST_CASE("desk-scale four-ue scenario converges within the iteration cap") {
  SolverOptions opts;
  opts.max_outer_iters = 300;
  opts.outer_tol = 1e-4;
  const Run run = solve_desk(desk_cfg(4), opts, 5);
  CHECK(run.state.converged);
  check_monotone(run.state);
}

TEST_CASE("solver is deterministic and policy independent") {
  SolverOptions serial;
  serial.max_outer_iters = 8;
  const Run a = solve_desk(desk_cfg(), serial, 3);
  const Run b = solve_desk(desk_cfg(), serial, 3);
  SolverOptions par = serial;
  par.exec = Exec::openmp;
  const Run c = solve_desk(desk_cfg(), par, 3);
  REQUIRE(a.state.trace.size() == b.state.trace.size());
  REQUIRE(a.state.trace.size() == c.state.trace.size());
  for (std::size_t i = 0; i < a.state.trace.size(); ++i) {
    CHECK(a.state.trace[i].obj_after_theta == b.state.trace[i].obj_after_theta);
    CHECK(a.state.trace[i].obj_after_theta == c.state.trace[i].obj_after_theta);
    CHECK(a.state.trace[i].sum_rate == c.state.trace[i].sum_rate);
  }
  CHECK(a.state.final_sum_rate == c.state.final_sum_rate);
}

TEST_CASE("single-ue ideal link reaches water-filling capacity") {
  ScenarioConfig cfg = desk_cfg(1);
  cfg.iqi_level = IqiLevel::ideal;
  cfg.num_subcarriers = 2;
  cfg.streams_per_ue = 2;  // N_t = b_k
  const AllocationMap alloc = AllocationMap::full(cfg);
  const ChannelSet ch = assemble_channels(cfg, 0);
  const DistortionMatrices dist = ideal_distortion(cfg);

  SolverOptions opts;
  opts.max_outer_iters = 2000;
  opts.outer_tol = 1e-12;
  SUBCASE("frozen reflect coefficients") { opts.optimize_ris = false; }
  SUBCASE("optimized reflect coefficients") { opts.optimize_ris = true; }
  const SolverState st = outer_solve(ch, dist, cfg, alloc, opts, 0);

  const OperatorSet ops = build_operators(ch, st.ris, dist);
  for (int s : alloc.subcarriers_of(0)) {
    const double se = spectral_efficiency(st.blocks, ops, alloc, cfg.noise_power_mw(), 0, s);
    const double cap = testing::waterfilling_capacity(effective_channel(ch, st.ris, 0, s),
                                                      cfg.power_mw(), cfg.noise_power_mw());
    CHECK(se <= cap + 1e-9 * (1.0 + cap));
    CHECK(cap - se <= 1e-3);
  }
}

TEST_CASE("restricted allocations solve with asymmetric image pairs") {
  ScenarioConfig cfg = desk_cfg(3);
  cfg.num_subcarriers = 4;
  // UE 0 misses the image of subcarrier 1; UE 2 is on a single pair.
  cfg.ue_subcarriers = {{-2, 1, 2}, {}, {-1, 1}};
  cfg.validate();
  const AllocationMap alloc = AllocationMap::from_config(cfg);
  const ChannelSet ch = assemble_channels(cfg, 2);
  const DistortionMatrices dist = build_distortion(sample_iqi(cfg.iqi_level, cfg, 2), cfg);
  SolverOptions opts;
  opts.max_outer_iters = 30;
  const SolverState a = outer_solve(ch, dist, cfg, alloc, opts, 2);
  const SolverState b = outer_solve(ch, dist, cfg, alloc, opts, 2);

  double prev = a.initial_objective;
  for (const IterationTrace& t : a.trace) {
    for (double v : {t.obj_after_u, t.obj_after_w, t.obj_after_v, t.obj_after_theta}) {
      CHECK(v <= prev + 1e-9 * (1.0 + std::abs(prev)));
      prev = v;
    }
    CHECK(t.max_power_ratio <= 1.0 + 1e-9);
    CHECK(std::abs(t.sum_log2w - t.sum_rate_after_w) <=
          1e-8 * (1.0 + std::abs(t.sum_rate_after_w)));
  }
  CHECK(std::isfinite(a.final_sum_rate));
  CHECK(a.final_sum_rate > 0.0);
  CHECK(a.final_objective == b.final_objective);

  // unserved pairs never get blocks
  CHECK(a.blocks.v[alloc.plan().slot_of_index(-1)][0].size() == 0);
  CHECK(a.blocks.v[alloc.plan().slot_of_index(2)][2].size() == 0);
}

TEST_CASE("severed channels give a zero-rate plateau") {
  ScenarioConfig cfg = desk_cfg(2);
  const AllocationMap alloc = AllocationMap::full(cfg);
  ChannelSet ch = assemble_channels(cfg, 0);
  for (auto& g : ch.G) g.setZero();
  for (auto& per : ch.H) {
    for (auto& h : per) h.setZero();
  }
  for (auto& per : ch.R) {
    for (auto& r : per) r.setZero();
  }
  const DistortionMatrices dist = build_distortion(sample_iqi(cfg.iqi_level, cfg, 0), cfg);
  SolverOptions opts;
  opts.max_outer_iters = 10;
  const SolverState st = outer_solve(ch, dist, cfg, alloc, opts, 0);
  CHECK(st.final_sum_rate == 0.0);
  const double expected = static_cast<double>(cfg.streams()) * cfg.num_ues * cfg.num_subcarriers;
  CHECK(st.final_objective == doctest::Approx(expected).epsilon(1e-12));
  for (const IterationTrace& t : st.trace) {
    CHECK(t.obj_after_theta == doctest::Approx(expected).epsilon(1e-12));
  }
}
