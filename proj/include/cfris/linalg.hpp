#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cfris {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cxd kImag{0.0, 1.0};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

// Exact Hermitian symmetrization; removes roundoff skew before solves.
inline CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

// Solve a*x = b for Hermitian positive (semi)definite a. Uses LDLT and
// retries with a small relative ridge when the factorization is unreliable.
CMat solve_hermitian_psd(const CMat& a, const CMat& b);

// log2 |a| for Hermitian positive definite a.
double log2det_hermitian_pd(const CMat& a);

double min_eigenvalue_hermitian(const CMat& a);
double min_eigenvalue_symmetric(const RMat& a);
double max_eigenvalue_symmetric(const RMat& a);

}  // namespace cfris
