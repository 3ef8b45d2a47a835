#include "cfris/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "cfris/baselines.hpp"
#include "cfris/channel.hpp"
#include "cfris/synthetic.hpp"

namespace cfris {
namespace {

struct Reporter {
  std::ostream& out;
  bool all_ok = true;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "[ ok ] " : "[FAIL] ") << name;
    if (!detail.empty()) out << " (" << detail << ")";
    out << "\n";
    all_ok = all_ok && ok;
  }
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

void check_allocation(Reporter& rep, Rng rng) {
  const int K = 5, S = 8;
  std::vector<std::vector<int>> per_ue(K);
  const SubcarrierPlan plan{S};
  for (int k = 0; k < K; ++k) {
    for (int slot = 0; slot < S; ++slot) {
      if (rng.uniform() < 0.6) per_ue[k].push_back(plan.index_of_slot(slot));
    }
    if (per_ue[k].empty()) per_ue[k].push_back(1);
  }
  const AllocationMap map = AllocationMap::from_sets(K, S, per_ue);
  bool ok = true;
  for (int k = 0; k < K; ++k) {
    for (int slot = 0; slot < S; ++slot) {
      const int s = plan.index_of_slot(slot);
      const auto& us = map.ues_on(s);
      const bool in_ks = std::find(us.begin(), us.end(), k) != us.end();
      const auto& sc = map.subcarriers_of(k);
      const bool in_sk = std::find(sc.begin(), sc.end(), s) != sc.end();
      ok = ok && (in_ks == in_sk);
    }
  }
  rep.check("allocation duality", ok);
  bool mir = true;
  for (int slot = 0; slot < S; ++slot) {
    const int s = plan.index_of_slot(slot);
    mir = mir && plan.mirror(plan.mirror(s)) == s && plan.valid_index(plan.mirror(s));
  }
  rep.check("subcarrier mirror involution", mir);
}

void check_distortion(Reporter& rep, Rng rng) {
  ScenarioConfig cfg = synthetic_config(2, 3, 1, 4, 2, 2, 3, 1);
  cfg.iqi_level = IqiLevel::level3;
  cfg.rng_seed = rng.next_u64();
  const DistortionMatrices d = build_distortion(sample_iqi(cfg.iqi_level, cfg, 0), cfg);
  double worst = (d.k1 + d.k2.conjugate() - CVec::Ones(d.k1.size())).cwiseAbs().maxCoeff();
  for (int k = 0; k < cfg.num_ues; ++k) {
    worst = std::max(worst, (d.d1[k] + d.d2[k].conjugate() - CVec::Ones(d.d1[k].size()))
                                .cwiseAbs()
                                .maxCoeff());
  }
  rep.check("distortion mixing identities", worst < 1e-14,
            "max deviation " + sci(worst));
}

void check_steering(Reporter& rep) {
  const CVec a = upa_response(0.4, -0.2, 4, 3);
  const CVec ax = upa_axis_response(std::sin(0.4) * std::cos(-0.2), 4);
  const CVec ay = upa_axis_response(std::sin(-0.2), 3);
  CVec kron(12);
  for (int i = 0; i < 4; ++i) kron.segment(i * 3, 3) = ax(i) * ay;
  const bool mod_ok = (a.cwiseAbs() - RVec::Ones(12)).cwiseAbs().maxCoeff() < 1e-12;
  rep.check("planar steering kronecker structure", (a - kron).norm() < 1e-12 && mod_ok);
}

void check_dft_roundtrip(Reporter& rep, Rng rng) {
  ScenarioConfig cfg = synthetic_config(1, 1, 1, 4, 8, 2, 2, 1);
  const TapSet taps = gen_link_taps({0, 0, 0}, ArraySpec::make_ula(2), {10, 20, 3},
                                    ArraySpec::make_ula(2), 10.0, cfg, rng);
  const int S = cfg.num_subcarriers;
  // Recover per-delay aggregates from the full bin responses.
  double worst = 0.0;
  for (int l = 0; l < cfg.num_taps; ++l) {
    CMat acc = CMat::Zero(2, 2);
    for (int n = 0; n < S; ++n) {
      acc += freq_response_bin(taps, n, S) *
             std::exp(kImag * (2.0 * kPi * static_cast<double>(l) * n / S));
    }
    acc /= static_cast<double>(S);
    CMat direct = CMat::Zero(2, 2);
    auto add = [&](const PathComponent& p) {
      if (p.delay != l) return;
      direct += p.weight * (steering(taps.rx, p.geom.aoa_az, p.geom.aoa_el) *
                            steering(taps.tx, p.geom.aod_az, p.geom.aod_el).adjoint());
    };
    add(taps.los);
    for (const auto& p : taps.nlos) add(p);
    worst = std::max(worst, (acc - direct).norm() / std::max(1e-300, direct.norm()));
  }
  rep.check("multipath DFT round trip", worst < 1e-10, "rel err " + sci(worst));
}

void check_theta_oracle(Reporter& rep, Rng rng, Exec exec) {
  ScenarioConfig cfg = synthetic_config(2, 3, 2, 4, 4, 2, 2, 2);
  cfg.iqi_level = IqiLevel::level3;
  cfg.rng_seed = rng.next_u64();
  const AllocationMap alloc = AllocationMap::full(cfg);
  const ChannelSet ch = random_channels(cfg, rng.child(1));
  const DistortionMatrices dist = build_distortion(sample_iqi(cfg.iqi_level, cfg, 0), cfg);
  const BlockVariables blocks = random_blocks(cfg, alloc, rng.child(2));
  const QuadraticForm qf = build_real_qcqp(build_coupling(blocks, ch, dist, alloc, exec));

  const double noise = cfg.noise_power_mw();
  auto direct = [&](const CVec& theta) {
    const OperatorSet ops = build_operators(ch, RisState{theta}, dist, exec);
    return wmmse_objective(blocks, ops, alloc, noise);
  };
  Rng pr = rng.child(3);
  double worst = 0.0;
  const int qm = cfg.total_ris_elements();
  for (int probe = 0; probe < 6; ++probe) {
    CVec ta(qm), tb(qm);
    for (int i = 0; i < qm; ++i) {
      ta(i) = cxd(pr.uniform(-0.7, 0.7), pr.uniform(-0.7, 0.7));
      tb(i) = cxd(pr.uniform(-0.7, 0.7), pr.uniform(-0.7, 0.7));
    }
    const double lhs = qf.eval_complex(ta) - qf.eval_complex(tb);
    const double rhs = direct(ta) - direct(tb);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
  }
  rep.check("theta quadratic matches weighted-MSE objective", worst < 1e-9,
            "rel err " + sci(worst));

  const double fro = qf.delta.norm();
  const double mineig = min_eigenvalue_symmetric(qf.delta_sym);
  rep.check("theta subproblem convexity margin", mineig >= -1e-8 * fro,
            "min eig " + sci(mineig));

  RVec nu0 = RVec::Zero(2 * qm);
  const RisSolveResult bcd = solve_ris(qf, nu0, 1e-10, 500);
  const RVec pgd = oracle_projected_gradient(qf, nu0, 20000);
  const double f_b = qf.eval_real(bcd.nu), f_p = qf.eval_real(pgd);
  rep.check("reflect BCD matches projected gradient", close_rel(f_b, f_p, 1e-6) && f_b <= f_p + 1e-9 * (1.0 + std::abs(f_p)),
            "bcd " + sci(f_b) + " pgd " + sci(f_p));
}

void check_solver(Reporter& rep, Exec exec) {
  ScenarioConfig cfg;
  cfg.num_aps = 2;
  cfg.num_ues = 2;
  cfg.num_ris = 1;
  cfg.elements_per_ris = 4;
  cfg.num_subcarriers = 2;
  cfg.tx_antennas = 2;
  cfg.rx_antennas = 2;
  cfg.streams_per_ue = 1;
  cfg.iqi_level = IqiLevel::level3;
  cfg.power_dbm = 0.0;
  cfg.rng_seed = 11;
  cfg.validate();
  const AllocationMap alloc = AllocationMap::full(cfg);
  const ChannelSet ch = assemble_channels(cfg, 0, exec);
  const DistortionMatrices dist = build_distortion(sample_iqi(cfg.iqi_level, cfg, 0), cfg);
  SolverOptions opts;
  opts.max_outer_iters = 40;
  opts.exec = exec;
  const SolverState st = outer_solve(ch, dist, cfg, alloc, opts, 0);

  bool monotone = true;
  double prev = st.initial_objective;
  double worst_jump = 0.0;
  for (const IterationTrace& t : st.trace) {
    for (double v : {t.obj_after_u, t.obj_after_w, t.obj_after_v, t.obj_after_theta}) {
      worst_jump = std::max(worst_jump, (v - prev) / (1.0 + std::abs(prev)));
      monotone = monotone && v <= prev + 1e-9 * (1.0 + std::abs(prev));
      prev = v;
    }
  }
  rep.check("objective monotone across block updates", monotone,
            "worst relative increase " + sci(worst_jump));

  double worst_pow = 0.0, worst_slack = 0.0, worst_theta = 0.0, worst_rate = 0.0;
  for (const IterationTrace& t : st.trace) {
    worst_pow = std::max(worst_pow, t.max_power_ratio - 1.0);
    worst_slack = std::max(worst_slack, t.max_slackness);
    worst_theta = std::max(worst_theta, t.max_theta_modulus - 1.0);
    worst_rate = std::max(worst_rate, std::abs(t.sum_log2w - t.sum_rate_after_w) /
                                          (1.0 + std::abs(t.sum_rate_after_w)));
  }
  rep.check("power feasibility", worst_pow <= 1e-9);
  rep.check("complementary slackness", worst_slack <= 1e-6);
  rep.check("reflect modulus feasibility", worst_theta <= 1e-9);
  rep.check("rate identity after weight update", worst_rate <= 1e-8,
            "worst rel gap " + sci(worst_rate));
}

}  // namespace

bool run_validation(std::ostream& out, Exec exec) {
  Reporter rep{out};
  Rng rng = Rng::from_seed(20240917);
  check_allocation(rep, rng.child(1));
  check_distortion(rep, rng.child(2));
  check_steering(rep);
  check_dft_roundtrip(rep, rng.child(3));
  check_theta_oracle(rep, rng.child(4), exec);
  check_solver(rep, exec);
  out << (rep.all_ok ? "validation passed\n" : "validation FAILED\n");
  return rep.all_ok;
}

}  // namespace cfris
