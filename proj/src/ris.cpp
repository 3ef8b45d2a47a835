#include "cfris/ris.hpp"

#include <cmath>
#include <stdexcept>

namespace cfris {

RisCouplingSet build_coupling(const BlockVariables& blocks, const ChannelSet& ch,
                              const DistortionMatrices& dist, const AllocationMap& alloc,
                              Exec exec) {
  const auto& plan = ch.plan;
  const int S = plan.S;
  const int qm = S > 0 ? static_cast<int>(ch.G[0].cols()) : 0;
  const int rx = static_cast<int>(dist.k1.size());

  RisCouplingSet out;
  out.per_subcarrier.resize(S);
  parallel_for(exec, S, [&](std::int64_t slot_i) {
    const int slot = static_cast<int>(slot_i);
    const int s = plan.index_of_slot(slot);
    const int mslot = plan.slot_of_index(-s);
    RisCoupling& c = out.per_subcarrier[slot];

    // Combiner-weight aggregate over the UEs served on s.
    CMat bmat = CMat::Zero(rx, rx);
    for (int k : alloc.ues_on(s)) {
      bmat.noalias() += blocks.u[slot][k] * blocks.w[slot][k] * blocks.u[slot][k].adjoint();
    }
    bmat = hermitize(bmat);

    const CMat k1g = dist.k1.asDiagonal() * ch.G[slot];                 // K1 G(s)
    const CMat k2gm = dist.k2.asDiagonal() * ch.G[mslot].conjugate();   // K2 conj(G(-s))
    c.ups_hs = hermitize(k1g.adjoint() * bmat * k1g);
    c.ups_hc = k1g.adjoint() * bmat * k2gm;
    c.ups_ts = c.ups_hc.adjoint();
    c.ups_tc = hermitize(k2gm.adjoint() * bmat * k2gm);

    auto zero = [&] { return CMat::Zero(qm, qm); };
    c.gam_hs_sig = zero(); c.gam_ts_sig = zero(); c.gam_hc_sig = zero(); c.gam_tc_sig = zero();
    c.gam_hs_img = zero(); c.gam_ts_img = zero(); c.gam_hc_img = zero(); c.gam_tc_img = zero();
    CMat phi = zero();
    const CMat bk1g = bmat * k1g;
    const CMat bk2gm = bmat * k2gm;

    // Direct-signal families: precoders transmitted on s.
    for (int i : alloc.ues_on(s)) {
      const CMat x = ch.H[slot][i] * dist.d1[i].asDiagonal();                 // H(s) D1
      const CMat xc = ch.H[mslot][i].conjugate() * dist.d2[i].asDiagonal();   // conj(H(-s)) D2
      const CMat xv = x * blocks.v[slot][i];
      const CMat xcv = xc * blocks.v[slot][i];
      c.gam_hs_sig.noalias() += xv * xv.adjoint();
      c.gam_hc_sig.noalias() += xcv * xv.adjoint();
      c.gam_ts_sig.noalias() += xv * xcv.adjoint();
      c.gam_tc_sig.noalias() += xcv * xcv.adjoint();

      // Cross terms against the direct (non-RIS) part of the same operator.
      const CMat ci = dist.k1.asDiagonal() * ch.R[slot][i] * dist.d1[i].asDiagonal() +
                      dist.k2.asDiagonal() * ch.R[mslot][i].conjugate() * dist.d2[i].asDiagonal();
      const CMat m = blocks.v[slot][i] * blocks.v[slot][i].adjoint();
      phi.noalias() += x * (m * (ci.adjoint() * bk1g));
      phi.noalias() += (xc * (m * (ci.adjoint() * bk2gm))).conjugate();
    }

    // Image-leak families: precoders transmitted on -s, seen conjugated on s.
    for (int i : alloc.ues_on(-s)) {
      const CMat y = ch.H[slot][i] * dist.d2[i].conjugate().asDiagonal();     // H(s) conj(D2)
      const CMat yc = ch.H[mslot][i].conjugate() * dist.d1[i].conjugate().asDiagonal();
      const CMat vimg = blocks.v[mslot][i].conjugate();
      const CMat yv = y * vimg;
      const CMat ycv = yc * vimg;
      c.gam_hs_img.noalias() += yv * yv.adjoint();
      c.gam_hc_img.noalias() += ycv * yv.adjoint();
      c.gam_ts_img.noalias() += yv * ycv.adjoint();
      c.gam_tc_img.noalias() += ycv * ycv.adjoint();

      const CMat cpi =
          dist.k1.asDiagonal() * ch.R[slot][i] * dist.d2[i].conjugate().asDiagonal() +
          dist.k2.asDiagonal() * ch.R[mslot][i].conjugate() * dist.d1[i].conjugate().asDiagonal();
      const CMat mimg = vimg * vimg.adjoint();
      phi.noalias() += y * (mimg * (cpi.adjoint() * bk1g));
      phi.noalias() += (yc * (mimg * (cpi.adjoint() * bk2gm))).conjugate();
    }

    // Estimation cross terms (the -2 Re Tr(w u^H p1 v) part of the objective).
    for (int k : alloc.ues_on(s)) {
      const CMat x = ch.H[slot][k] * dist.d1[k].asDiagonal();
      const CMat xc = ch.H[mslot][k].conjugate() * dist.d2[k].asDiagonal();
      const CMat vwu = blocks.v[slot][k] * blocks.w[slot][k] * blocks.u[slot][k].adjoint();
      phi.noalias() -= x * (vwu * k1g);
      phi.noalias() -= (xc * (vwu * k2gm)).conjugate();
    }
    c.phi = std::move(phi);
  });
  return out;
}

double QuadraticForm::eval_complex(const CVec& theta) const {
  const cxd quad = (theta.adjoint() * (sig_hs * theta)).value() +
                   (theta.transpose() * (sig_ts * theta)).value() +
                   (theta.adjoint() * (sig_hc * theta.conjugate())).value() +
                   (theta.transpose() * (sig_tc * theta.conjugate())).value();
  const cxd lin = (linear.transpose() * theta).value();
  return quad.real() + 2.0 * lin.real();
}

double QuadraticForm::eval_real(const RVec& nu) const {
  return nu.dot(delta * nu) + 2.0 * omega.dot(nu);
}

RVec theta_to_nu(const CVec& theta) {
  RVec nu(2 * theta.size());
  nu.head(theta.size()) = theta.real();
  nu.tail(theta.size()) = theta.imag();
  return nu;
}

CVec nu_to_theta(const RVec& nu) {
  const int qm = static_cast<int>(nu.size()) / 2;
  CVec theta(qm);
  theta.real() = nu.head(qm);
  theta.imag() = nu.tail(qm);
  return theta;
}

namespace {

RMat t_block(const CMat& sigma, double e1, double e2, double e3, double e4) {
  const int n = static_cast<int>(sigma.rows());
  RMat t(2 * n, 2 * n);
  t.topLeftCorner(n, n) = e1 * sigma.real();
  t.topRightCorner(n, n) = e2 * sigma.imag();
  t.bottomLeftCorner(n, n) = e3 * sigma.imag();
  t.bottomRightCorner(n, n) = e4 * sigma.real();
  return t;
}

}  // namespace

QuadraticForm build_real_qcqp(const RisCouplingSet& coupling) {
  QuadraticForm qf;
  if (coupling.per_subcarrier.empty()) throw std::invalid_argument("build_real_qcqp: empty set");
  const int qm = static_cast<int>(coupling.per_subcarrier.front().ups_hs.rows());
  qf.qm = qm;
  qf.sig_hs = CMat::Zero(qm, qm);
  qf.sig_ts = CMat::Zero(qm, qm);
  qf.sig_hc = CMat::Zero(qm, qm);
  qf.sig_tc = CMat::Zero(qm, qm);
  qf.linear = CVec::Zero(qm);
  for (const RisCoupling& c : coupling.per_subcarrier) {
    qf.sig_hs += c.ups_hs.cwiseProduct((c.gam_hs_sig + c.gam_hs_img).transpose());
    qf.sig_ts += c.ups_ts.cwiseProduct((c.gam_ts_sig + c.gam_ts_img).transpose());
    qf.sig_hc += c.ups_hc.cwiseProduct((c.gam_hc_sig + c.gam_hc_img).transpose());
    qf.sig_tc += c.ups_tc.cwiseProduct((c.gam_tc_sig + c.gam_tc_img).transpose());
    qf.linear += c.phi.diagonal();
  }
  qf.delta = t_block(qf.sig_hs, 1, -1, 1, 1) + t_block(qf.sig_tc, 1, 1, -1, 1) +
             t_block(qf.sig_hc, 1, 1, 1, -1) + t_block(qf.sig_ts, 1, -1, -1, -1);
  qf.delta_sym = 0.5 * (qf.delta + qf.delta.transpose());
  qf.omega = RVec(2 * qm);
  qf.omega.head(qm) = qf.linear.real();
  qf.omega.tail(qm) = -qf.linear.imag();

  // Real/complex equivalence probe.
  Rng rng = Rng::from_seed(0xC0FFEE).child(0x7, 0);
  for (int probe = 0; probe < 3; ++probe) {
    CVec theta(qm);
    for (int i = 0; i < qm; ++i) theta(i) = cxd(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
    const double vc = qf.eval_complex(theta);
    const double vr = qf.eval_real(theta_to_nu(theta));
    if (std::abs(vc - vr) > 1e-8 * (1.0 + std::max(std::abs(vc), std::abs(vr)))) {
      throw std::logic_error("build_real_qcqp: real/complex forms disagree");
    }
  }
  return qf;
}

namespace {

struct BlockProblem {
  Eigen::Matrix2d a;   // symmetric 2x2 quadratic coefficient
  Eigen::Vector2d w;   // effective linear coefficient (couplings folded in)
};

BlockProblem block_problem(const QuadraticForm& qf, int l, const RVec& nu) {
  const int qm = qf.qm;
  const int l2 = l + qm;
  BlockProblem bp;
  bp.a << qf.delta_sym(l, l), qf.delta_sym(l, l2), qf.delta_sym(l2, l), qf.delta_sym(l2, l2);
  const double c1 = qf.delta_sym.row(l).dot(nu) - qf.delta_sym(l, l) * nu(l) -
                    qf.delta_sym(l, l2) * nu(l2);
  const double c2 = qf.delta_sym.row(l2).dot(nu) - qf.delta_sym(l2, l) * nu(l) -
                    qf.delta_sym(l2, l2) * nu(l2);
  bp.w << c1 + qf.omega(l), c2 + qf.omega(l2);
  return bp;
}

double block_value(const BlockProblem& bp, const Eigen::Vector2d& b) {
  return b.dot(bp.a * b) + 2.0 * bp.w.dot(b);
}

Eigen::Vector2d shifted_solve(const BlockProblem& bp, double lambda) {
  const double a = bp.a(0, 0) + lambda, b = bp.a(0, 1), c = bp.a(1, 1) + lambda;
  const double det = a * c - b * b;
  Eigen::Vector2d x;
  x << (-c * bp.w(0) + b * bp.w(1)) / det, (b * bp.w(0) - a * bp.w(1)) / det;
  return x;
}

Eigen::Vector2d clamp_disk(Eigen::Vector2d x) {
  const double n = x.norm();
  return n > 1.0 ? Eigen::Vector2d(x / n) : x;
}

// Boundary minimizer by angle scan plus golden-section refinement; used when
// the 2x2 block is (numerically) singular.
Eigen::Vector2d boundary_scan(const BlockProblem& bp) {
  auto value_at = [&](double t) {
    return block_value(bp, Eigen::Vector2d(std::cos(t), std::sin(t)));
  };
  constexpr int kSamples = 360;
  double best_t = 0.0, best_v = value_at(0.0);
  for (int i = 1; i < kSamples; ++i) {
    const double t = 2.0 * kPi * i / kSamples;
    const double v = value_at(t);
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  }
  double lo = best_t - 2.0 * kPi / kSamples;
  double hi = best_t + 2.0 * kPi / kSamples;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = value_at(x1), f2 = value_at(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo); f1 = value_at(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo); f2 = value_at(x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  return {std::cos(t), std::sin(t)};
}

Eigen::Vector2d solve_block_problem(const BlockProblem& bp, const Eigen::Vector2d& incumbent) {
  const double a = bp.a(0, 0), b = bp.a(0, 1), c = bp.a(1, 1);
  const double tr = a + c;
  const double disc = std::sqrt(std::max(0.0, (a - c) * (a - c) + 4.0 * b * b));
  const double lam_min = 0.5 * (tr - disc);
  const double lam_max = 0.5 * (tr + disc);
  const double scale = std::max({std::abs(lam_max), std::abs(lam_min), bp.w.norm()});

  Eigen::Vector2d best = incumbent;
  double best_v = block_value(bp, best);
  auto consider = [&](const Eigen::Vector2d& cand) {
    const Eigen::Vector2d x = clamp_disk(cand);
    const double v = block_value(bp, x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  };

  if (scale == 0.0) return best;  // objective constant in this block

  if (lam_min > 1e-13 * scale) {
    const Eigen::Vector2d inner = shifted_solve(bp, 0.0);
    if (inner.norm() <= 1.0) {
      consider(inner);
      return best;
    }
    // Boundary: ||x(lambda)|| is strictly decreasing, bracket then bisect.
    double hi = std::max(bp.w.norm(), scale);
    while (shifted_solve(bp, hi).norm() > 1.0) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 120; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (shifted_solve(bp, mid).norm() > 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    consider(shifted_solve(bp, hi));
    return best;
  }

  // Singular quadratic block: try the pseudo-inverse interior point, then the
  // boundary scan.
  if (lam_max > 1e-13 * scale) {
    // Eigenbasis of the symmetric 2x2.
    Eigen::Vector2d q1;  // eigenvector for lam_max
    if (std::abs(b) > 1e-300) {
      q1 << lam_max - c, b;
      q1.normalize();
    } else {
      q1 = a >= c ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
    }
    const Eigen::Vector2d q2(-q1(1), q1(0));
    const double w1 = q1.dot(bp.w), w2 = q2.dot(bp.w);
    if (std::abs(w2) <= 1e-12 * scale) {
      consider(-(w1 / lam_max) * q1);
    }
  }
  consider(boundary_scan(bp));
  return best;
}

}  // namespace

Eigen::Vector2d solve_block(const QuadraticForm& qf, int l, const RVec& nu) {
  const BlockProblem bp = block_problem(qf, l, nu);
  const Eigen::Vector2d incumbent(nu(l), nu(l + qf.qm));
  return solve_block_problem(bp, incumbent);
}

RisSolveResult solve_ris(const QuadraticForm& qf, const RVec& nu0, double rel_tol,
                         int max_sweeps) {
  const int qm = qf.qm;
  RisSolveResult res;
  res.nu = nu0;
  for (int l = 0; l < qm; ++l) {
    Eigen::Vector2d b(res.nu(l), res.nu(l + qm));
    b = clamp_disk(b);
    res.nu(l) = b(0);
    res.nu(l + qm) = b(1);
  }
  double prev = qf.eval_real(res.nu);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int l = 0; l < qm; ++l) {
      const BlockProblem bp = block_problem(qf, l, res.nu);
      const Eigen::Vector2d old_b(res.nu(l), res.nu(l + qm));
      const double old_v = block_value(bp, old_b);
      const Eigen::Vector2d new_b = solve_block_problem(bp, old_b);
      const double new_v = block_value(bp, new_b);
      res.worst_block_increase = std::max(res.worst_block_increase, new_v - old_v);
      if (new_v <= old_v) {
        res.nu(l) = new_b(0);
        res.nu(l + qm) = new_b(1);
      }
    }
    const double cur = qf.eval_real(res.nu);
    res.sweeps = sweep;
    if (std::abs(prev - cur) <= rel_tol * (1.0 + std::abs(cur))) {
      res.converged = true;
      res.objective = cur;
      return res;
    }
    prev = cur;
  }
  res.objective = prev;
  return res;
}

RVec oracle_projected_gradient(const QuadraticForm& qf, const RVec& nu0, int iters) {
  const int qm = qf.qm;
  const double lip = max_eigenvalue_symmetric(qf.delta + qf.delta.transpose());
  const double denom = std::max(2.0 * lip, 1e-12 * (1.0 + qf.omega.norm()));
  const double step = 1.0 / denom;
  RVec nu = nu0;
  for (int it = 0; it < iters; ++it) {
    const RVec grad = 2.0 * (qf.delta_sym * nu + qf.omega);
    nu -= step * grad;
    for (int l = 0; l < qm; ++l) {
      const double n = std::hypot(nu(l), nu(l + qm));
      if (n > 1.0) {
        nu(l) /= n;
        nu(l + qm) /= n;
      }
    }
  }
  return nu;
}

}  // namespace cfris
