#include "cfris/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cfris {

CMat solve_hermitian_psd(const CMat& a, const CMat& b) {
  const CMat ah = hermitize(a);
  Eigen::LDLT<CMat> ldlt(ah);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    // A rank-deficient system would still "solve" but with arbitrary junk
    // along the null space; route those to the minimum-norm path instead.
    const RVec d = ldlt.vectorD().real();
    const double dmax = d.maxCoeff();
    if (dmax > 0.0 && d.minCoeff() > 1e-12 * dmax) {
      CMat x = ldlt.solve(b);
      if (x.allFinite()) return x;
    }
  }
  // Minimum-norm solve through an eigenvalue-thresholded pseudoinverse.
  Eigen::SelfAdjointEigenSolver<CMat> es(ah);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian solve failed");
  const RVec ev = es.eigenvalues();
  const double cutoff = 1e-13 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  RVec inv = RVec::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * (es.eigenvectors().adjoint() * b);
}

double log2det_hermitian_pd(const CMat& a) {
  Eigen::LLT<CMat> llt(hermitize(a));
  if (llt.info() == Eigen::Success) {
    double acc = 0.0;
    const auto& l = llt.matrixLLT();
    for (int i = 0; i < l.rows(); ++i) acc += std::log2(l(i, i).real());
    return 2.0 * acc;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
  if (es.info() != Eigen::Success) throw std::runtime_error("log2det: eigensolver failed");
  double acc = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v <= 0.0) throw std::runtime_error("log2det: matrix not positive definite");
    acc += std::log2(v);
  }
  return acc;
}

double min_eigenvalue_hermitian(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double min_eigenvalue_symmetric(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue_symmetric(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace cfris
