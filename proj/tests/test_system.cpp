#include <cmath>

#include "cfris/synthetic.hpp"
#include "cfris/system.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/rigs.hpp"

using namespace cfris;
using testing::ScalarRig;
using testing::scalar_blocks;

TEST_CASE("effective channel basics") {
  ScalarRig rig(cxd(1, 0), cxd(1, 0), cxd(0, 0));
  const RisState off = RisState::zeros(1);
  CHECK(effective_channel(rig.ch, off, 0, 1)(0, 0) == cxd(0, 0));

  RisState quarter{CVec::Constant(1, kImag)};
  CHECK(std::abs(effective_channel(rig.ch, quarter, 0, 1)(0, 0) - kImag) < 1e-15);

  ScalarRig with_direct(cxd(2, 1), cxd(0.5, -0.25), cxd(-0.75, 0.1));
  CHECK(std::abs(effective_channel(with_direct.ch, off, 0, -1)(0, 0) - cxd(-0.75, 0.1)) <
        1e-15);
}

TEST_CASE("effective channel is affine in theta") {
  const ScenarioConfig cfg = synthetic_config(2, 2, 2, 3, 4, 2, 2, 1);
  Rng rng = Rng::from_seed(21);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const int qm = cfg.total_ris_elements();
  CVec t1(qm), t2(qm);
  for (int i = 0; i < qm; ++i) {
    t1(i) = 0.5 * rng.cnormal();
    t2(i) = 0.5 * rng.cnormal();
  }
  const CMat lhs = effective_channel(ch, RisState{t1 + t2}, 1, 2);
  const CMat rhs = effective_channel(ch, RisState{t1}, 1, 2) +
                   effective_channel(ch, RisState{t2}, 1, 2) - ch.r(2, 1);
  CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("distorted operators reduce to the bare channel under ideal hardware") {
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 4, 4, 2, 3, 1);
  Rng rng = Rng::from_seed(4);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const RisState ris = RisState::unit_random(cfg.total_ris_elements(), rng.child(2));
  const DistortionMatrices ideal = ideal_distortion(cfg);
  const auto [p1, p2] = build_p_operators(ch, ris, ideal, 1, -2);
  CHECK((p1 - effective_channel(ch, ris, 1, -2)).norm() == 0.0);
  CHECK(p2.norm() == 0.0);
}

TEST_CASE("forcing the direct receive path off isolates the image term") {
  const ScenarioConfig cfg = synthetic_config(1, 1, 1, 2, 2, 2, 2, 1);
  Rng rng = Rng::from_seed(6);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const RisState ris = RisState::unit_random(cfg.total_ris_elements(), rng.child(2));
  DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 0), cfg);
  dist.k1.setZero();
  const auto [p1, p2] = build_p_operators(ch, ris, dist, 0, 1);
  const CMat expected =
      dist.k2.asDiagonal() * effective_channel(ch, ris, 0, -1).conjugate() *
      dist.d2[0].asDiagonal();
  CHECK((p1 - expected).norm() < 1e-15);
}

TEST_CASE("operator assembly agrees with a conjugation-free evaluation route") {
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 3, 4, 2, 2, 1);
  Rng rng = Rng::from_seed(14);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const RisState ris = RisState::unit_random(cfg.total_ris_elements(), rng.child(2));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 1), cfg);
  const int k = 1, s = -2;
  const auto [p1, p2] = build_p_operators(ch, ris, dist, k, s);

  CVec a(cfg.tx_antennas), b(cfg.tx_antennas);
  for (int i = 0; i < cfg.tx_antennas; ++i) {
    a(i) = rng.cnormal();
    b(i) = rng.cnormal();
  }
  const CVec route_a = p1 * a + p2 * b;

  const CMat hb = effective_channel(ch, ris, k, s);
  const CMat hb_m = effective_channel(ch, ris, k, -s);  // not conjugated here
  const CVec d1 = dist.d1[k], d2 = dist.d2[k];
  const CVec term_p1 = dist.k1.cwiseProduct(hb * d1.cwiseProduct(a)) +
                       dist.k2.cwiseProduct((hb_m * (d2.cwiseProduct(a)).conjugate()).conjugate());
  const CVec term_p2 = dist.k2.cwiseProduct((hb_m * d1.cwiseProduct(b.conjugate())).conjugate()) +
                       dist.k1.cwiseProduct(hb * (d2.conjugate().cwiseProduct(b)));
  const CVec route_b = term_p1 + term_p2;
  CHECK((route_a - route_b).norm() < 1e-12 * (1.0 + route_b.norm()));
}

TEST_CASE("interference covariance structure") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const RisState off = RisState::zeros(1);
  const DistortionMatrices ideal = ideal_distortion(rig.cfg);
  const OperatorSet ops = build_operators(rig.ch, off, ideal);
  BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(0, 0), cxd(1, 0));

  // single UE with ideal hardware: pure noise
  const CMat j = interference_covariance(blocks, ops, rig.alloc, 1.0, 0, 1);
  CHECK(std::abs(j(0, 0) - cxd(1, 0)) < 1e-15);

  // zero precoders: distorted noise floor only
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 2, 2, 2, 2, 1);
  Rng rng = Rng::from_seed(17);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 0), cfg);
  const OperatorSet ops2 =
      build_operators(ch, RisState::unit_random(cfg.total_ris_elements(), rng.child(2)), dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  BlockVariables zero = BlockVariables::sized(2, 2);
  for (int slot = 0; slot < 2; ++slot) {
    for (int k = 0; k < 2; ++k) {
      zero.v[slot][k] = CMat::Zero(2, 1);
      zero.u[slot][k] = CMat::Zero(4, 1);
      zero.w[slot][k] = CMat::Identity(1, 1);
    }
  }
  const double noise = cfg.noise_power_mw();
  const CMat jz = interference_covariance(zero, ops2, alloc, noise, 0, 1);
  CMat expected = CMat::Zero(4, 4);
  expected.diagonal() = (noise * ops2.noise_gain).cast<cxd>();
  CHECK((jz - expected).norm() < 1e-15);

  // random instance: Hermitian, positive definite, floored by the noise term
  const BlockVariables rb = random_blocks(cfg, alloc, rng.child(3));
  const CMat jr = interference_covariance(rb, ops2, alloc, noise, 1, -1);
  CHECK((jr - jr.adjoint()).norm() < 1e-12 * jr.norm());
  CHECK(min_eigenvalue_hermitian(jr) >= noise * ops2.noise_gain.minCoeff() - 1e-12);
}

TEST_CASE("spectral efficiency scalar cases") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));  // direct gain 1
  const RisState off = RisState::zeros(1);
  const OperatorSet ops = build_operators(rig.ch, off, ideal_distortion(rig.cfg));

  BlockVariables zero = scalar_blocks(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  CHECK(spectral_efficiency(zero, ops, rig.alloc, 1.0, 0, 1) == 0.0);

  // |h|^2 p / noise = 1 -> one bit
  BlockVariables unit = scalar_blocks(cxd(1, 0), cxd(0, 0), cxd(1, 0));
  CHECK(spectral_efficiency(unit, ops, rig.alloc, 1.0, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(spectral_efficiency(unit, ops, rig.alloc, 0.0, 0, 1));
}

TEST_CASE("mse matrix scalar cases and the optimal-combiner identity") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const RisState off = RisState::zeros(1);
  const OperatorSet ops = build_operators(rig.ch, off, ideal_distortion(rig.cfg));

  BlockVariables no_combiner = scalar_blocks(cxd(1, 0), cxd(0, 0), cxd(1, 0));
  CHECK(std::abs(mse_matrix(no_combiner, ops, rig.alloc, 1.0, 0, 1)(0, 0) - cxd(1, 0)) <
        1e-15);

  BlockVariables at_opt = scalar_blocks(cxd(1, 0), cxd(0.5, 0), cxd(1, 0));
  CHECK(std::abs(mse_matrix(at_opt, ops, rig.alloc, 1.0, 0, 1)(0, 0) - cxd(0.5, 0)) < 1e-15);
}

TEST_CASE("closed-form combiner attains the matrix mmse and the rate identity") {
  const ScenarioConfig cfg = synthetic_config(2, 2, 1, 3, 2, 2, 3, 2);
  Rng rng = Rng::from_seed(23);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level2, cfg, 0), cfg);
  const RisState ris = RisState::unit_random(cfg.total_ris_elements(), rng.child(2));
  const OperatorSet ops = build_operators(ch, ris, dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  BlockVariables blocks = random_blocks(cfg, alloc, rng.child(3));
  const double noise = cfg.noise_power_mw();

  for (int k = 0; k < 2; ++k) {
    for (int s : alloc.subcarriers_of(k)) {
      const int slot = alloc.plan().slot_of_index(s);
      const CMat j = interference_covariance(blocks, ops, alloc, noise, k, s);
      const CMat pv = ops.p1[slot][k] * blocks.v[slot][k];
      blocks.u[slot][k] = solve_hermitian_psd(pv * pv.adjoint() + j, pv);

      // E at the closed-form combiner equals the direct matrix-mmse formula
      const CMat e = mse_matrix(blocks, ops, alloc, noise, k, s);
      const CMat eo = CMat::Identity(e.rows(), e.cols()) -
                      pv.adjoint() * solve_hermitian_psd(pv * pv.adjoint() + j, pv);
      CHECK((e - eo).norm() < 1e-10 * (1.0 + eo.norm()));

      // ... and -log2 |E| equals the spectral efficiency
      const double se = spectral_efficiency(blocks, ops, alloc, noise, k, s);
      CHECK(se == doctest::Approx(-log2det_hermitian_pd(e)).epsilon(1e-8));
    }
  }
}

TEST_CASE("mse matrix matches a direct monte carlo simulation") {
  const ScenarioConfig cfg = synthetic_config(1, 2, 1, 2, 2, 2, 2, 1);
  Rng rng = Rng::from_seed(31);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level3, cfg, 0), cfg);
  const RisState ris = RisState::unit_random(cfg.total_ris_elements(), rng.child(2));
  const OperatorSet ops = build_operators(ch, ris, dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  const BlockVariables blocks = random_blocks(cfg, alloc, rng.child(3));
  const double noise = cfg.noise_power_mw();

  const CMat e = mse_matrix(blocks, ops, alloc, noise, 0, 1);
  const auto sim =
      testing::simulate_mse(blocks, ops, dist, alloc, noise, 0, 1, 30000, rng.child(4));
  for (int r = 0; r < e.rows(); ++r) {
    for (int c = 0; c < e.cols(); ++c) {
      CHECK(std::abs(e(r, c).real() - sim.mean(r, c).real()) <=
            3.0 * sim.stderr_re(r, c) + 1e-12);
      CHECK(std::abs(e(r, c).imag() - sim.mean(r, c).imag()) <=
            3.0 * sim.stderr_im(r, c) + 1e-12);
    }
  }
}

TEST_CASE("objective reduces to summed mse traces under identity weights") {
  const ScenarioConfig cfg = synthetic_config(1, 2, 1, 2, 2, 2, 2, 1);
  Rng rng = Rng::from_seed(37);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(IqiLevel::level1, cfg, 0), cfg);
  const OperatorSet ops =
      build_operators(ch, RisState::unit_random(cfg.total_ris_elements(), rng.child(2)), dist);
  const AllocationMap alloc = AllocationMap::full(cfg);
  BlockVariables blocks = random_blocks(cfg, alloc, rng.child(3));
  const double noise = cfg.noise_power_mw();
  for (int slot = 0; slot < 2; ++slot) {
    for (int k = 0; k < 2; ++k) blocks.w[slot][k] = CMat::Identity(1, 1);
  }
  double traces = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int s : alloc.subcarriers_of(k)) {
      traces += mse_matrix(blocks, ops, alloc, noise, k, s).trace().real();
    }
  }
  CHECK(wmmse_objective(blocks, ops, alloc, noise) == doctest::Approx(traces).epsilon(1e-12));
}

TEST_CASE("objective scalar optimum value") {
  ScalarRig rig(cxd(0, 0), cxd(0, 0), cxd(1, 0));
  const OperatorSet ops = build_operators(rig.ch, RisState::zeros(1), ideal_distortion(rig.cfg));
  const BlockVariables blocks = scalar_blocks(cxd(1, 0), cxd(0.5, 0), cxd(2, 0));
  // per pair: tr(2 * 0.5) - log2(2) = 0, over two subcarriers
  CHECK(std::abs(wmmse_objective(blocks, ops, rig.alloc, 1.0)) < 1e-12);
}
