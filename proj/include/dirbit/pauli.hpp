#pragma once

// Pauli matrices and the coefficient map between two-qubit density matrices
// and real (4 x 4) correlation arrays c(mu, nu) = tr(rho sigma_mu (x) sigma_nu).

#include "dirbit/common.hpp"

#include <complex>

#include <unsupported/Eigen/KroneckerProduct>

namespace dirbit {

using Complex = std::complex<double>;

/// sigma_0 = identity, then X, Y, Z.
inline CMat pauli(int k) {
  require(k >= 0 && k <= 3, "pauli: index must be 0..3");
  CMat s = CMat::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -i, i, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

inline CMat ckron(const CMat& a, const CMat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

/// sigma_mu (x) sigma_nu.
inline CMat pauli2(int mu, int nu) { return ckron(pauli(mu), pauli(nu)); }

inline double hermiticity_defect(const CMat& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

/// c(mu, nu) = Re tr(rho sigma_mu (x) sigma_nu), as a 4 x 4 real matrix.
inline Mat pauli_coefficients(const CMat& rho) {
  require(rho.rows() == 4 && rho.cols() == 4, "pauli_coefficients: matrix must be 4x4");
  Mat c(4, 4);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) c(mu, nu) = (rho * pauli2(mu, nu)).trace().real();
  return c;
}

/// Inverse of pauli_coefficients: (1/4) sum c(mu, nu) sigma_mu (x) sigma_nu.
inline CMat density_from_coefficients(const Mat& c) {
  require(c.rows() == 4 && c.cols() == 4, "density_from_coefficients: matrix must be 4x4");
  CMat rho = CMat::Zero(4, 4);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) rho += 0.25 * c(mu, nu) * pauli2(mu, nu);
  return rho;
}

/// Partial transpose on the second qubit.
inline CMat partial_transpose_b(const CMat& rho) {
  require(rho.rows() == 4 && rho.cols() == 4, "partial_transpose_b: matrix must be 4x4");
  CMat out(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) out(2 * a + b, 2 * ap + bp) = rho(2 * a + bp, 2 * ap + b);
  return out;
}

/// Checks Hermitian, positive semidefinite, unit trace; throws InputError.
inline void require_density(const CMat& rho, const std::string& who) {
  require(rho.rows() == rho.cols(), who + ": matrix must be square");
  require(hermiticity_defect(rho) <= 1e-10, who + ": matrix must be Hermitian");
  require(std::abs(rho.trace() - Complex(1.0, 0.0)) <= 1e-10, who + ": trace must be 1");
  const Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (rho + rho.adjoint()));
  require(eig.eigenvalues().minCoeff() >= -1e-10, who + ": matrix must be positive semidefinite");
}

/// Sum of |negative eigenvalues| of the partial transpose.
inline double negativity(const CMat& rho) {
  require(rho.rows() == 4, "negativity: two-qubit density matrix required");
  require_density(rho, "negativity");
  const CMat pt = partial_transpose_b(0.5 * (rho + rho.adjoint()));
  const Vec ev = Eigen::SelfAdjointEigenSolver<CMat>(pt).eigenvalues();
  double n = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) < 0.0) n -= ev(k);
  return n;
}

}  // namespace dirbit
