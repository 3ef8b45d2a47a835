#pragma once

#include <vector>

#include "cfris/system.hpp"

namespace cfris {

// The weighted-MSE objective, as a function of the reflect vector theta with
// all other blocks held fixed, is a convex quadratic. Because the surface
// response enters the receive path both directly and conjugated (through the
// image subcarrier), four coupling families appear, keyed by how theta shows
// up in the sandwich trace:
//   hs: Tr(Theta^H ups Theta gam)        -> theta^H (ups .* gam^T) theta
//   ts: Tr(Theta^T ups Theta gam)        -> theta^T (ups .* gam^T) theta
//   hc: Tr(Theta^H ups Theta^* gam)      -> theta^H (ups .* gam^T) conj(theta)
//   tc: Tr(Theta^T ups Theta^* gam)      -> theta^T (ups .* gam^T) conj(theta)
// `ups` factors live on the array/combiner side; `gam` factors live on the
// UE/precoder side, split into the direct-signal part (sig) and the
// image-leak part (img). `phi` carries the linear coefficient: the objective
// contains + 2 Re Tr(diag(theta) phi).
struct RisCoupling {
  CMat ups_hs, ups_ts, ups_hc, ups_tc;             // QM x QM
  CMat gam_hs_sig, gam_ts_sig, gam_hc_sig, gam_tc_sig;
  CMat gam_hs_img, gam_ts_img, gam_hc_img, gam_tc_img;
  CMat phi;
};

struct RisCouplingSet {
  std::vector<RisCoupling> per_subcarrier;  // slot-major
};

RisCouplingSet build_coupling(const BlockVariables& blocks, const ChannelSet& ch,
                              const DistortionMatrices& dist, const AllocationMap& alloc,
                              Exec exec = Exec::serial);

// Reduced quadratic over theta and its real split nu = [Re theta; Im theta]:
// the theta-dependent objective equals both
//   Re( th^H sig_hs th + th^T sig_ts th + th^H sig_hc conj(th)
//       + th^T sig_tc conj(th) ) + 2 Re(linear^T th)
// and  nu^T delta nu + 2 omega^T nu  (verified by a probe at build time).
struct QuadraticForm {
  int qm = 0;
  CMat sig_hs, sig_ts, sig_hc, sig_tc;  // QM x QM
  CVec linear;                          // QM
  RMat delta;                           // 2QM x 2QM as assembled
  RMat delta_sym;                       // (delta + delta^T)/2, used by the solver
  RVec omega;                           // 2QM

  double eval_complex(const CVec& theta) const;
  double eval_real(const RVec& nu) const;
};

// Throws std::logic_error if the real and complex forms disagree beyond
// 1e-8 relative on a random probe (an assembly bug, not a data issue).
QuadraticForm build_real_qcqp(const RisCouplingSet& coupling);

RVec theta_to_nu(const CVec& theta);
CVec nu_to_theta(const RVec& nu);

// Exact minimizer of the 2D block (nu_l, nu_{l+QM}) over the unit disk with
// every other entry of nu fixed. Interior solution when the unconstrained
// minimum fits; otherwise the boundary minimizer (multiplier bisection, with
// a 360-sample phase scan plus golden-section refinement when the 2x2 block
// is singular). Never increases the objective.
Eigen::Vector2d solve_block(const QuadraticForm& qf, int l, const RVec& nu);

struct RisSolveResult {
  RVec nu;
  double objective = 0.0;       // quadratic-form value at nu
  int sweeps = 0;
  bool converged = false;
  double worst_block_increase = 0.0;  // max objective increase over all block updates
};

// Cyclic block-coordinate descent over the QM unit-disk blocks. The problem
// is convex, so the sweep limit is a safety net, not a tuning knob.
RisSolveResult solve_ris(const QuadraticForm& qf, const RVec& nu0, double rel_tol,
                         int max_sweeps);

// Projected gradient descent with per-block disk projection and fixed step
// 1/(2 lambda_max(delta + delta^T)). Verification oracle for solve_ris.
RVec oracle_projected_gradient(const QuadraticForm& qf, const RVec& nu0, int iters);

}  // namespace cfris
