#pragma once

// Shared types, tolerances, and error classes for the dirbit toolkit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dirbit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr const char* kVersion = "dirbit-toolkit 1.0.0";

/// Absolute tolerance for state and effect membership.
inline constexpr double kMembershipTol = 1e-9;
/// Tolerance for unit vectors and orthogonality of frames.
inline constexpr double kUnitTol = 1e-10;

/// Bad caller input (wrong dimension, out-of-range parameter, non-unit vector).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs that are individually valid but contradict each other.
class InconsistentInput : public InputError {
 public:
  using InputError::InputError;
};

/// A numerical object that should be non-degenerate turned out singular.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on an outcome of probability zero.
class UndefinedConditional : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

/// An internal consistency check failed. Signals a bug, not bad input.
class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Product states failed to span the composite space.
class LocalTomographyViolation : public VerificationFailure {
 public:
  using VerificationFailure::VerificationFailure;
};

/// Numerical routine failed or disagreed with its cross-check.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The data carries no usable direction information.
class NoDirectionInformation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measurement protocol hit one of its documented failure branches.
class ProtocolFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

inline void require_unit(const Vec& x, const std::string& what) {
  if (std::abs(x.norm() - 1.0) > kUnitTol) {
    throw InputError(what + " must be a unit vector (norm " + std::to_string(x.norm()) + ")");
  }
}

inline double orthogonality_defect(const Mat& m) {
  return (m.transpose() * m - Mat::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

inline double antisymmetry_defect(const Mat& m) {
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

/// Angle between two nonzero vectors, stable near 0 and pi.
inline double angle_between(const Vec& u, const Vec& v) {
  const Vec a = u.normalized();
  const Vec b = v.normalized();
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

inline double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }
inline double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

inline Vec unit_vector(int dim, int index) {
  Vec e = Vec::Zero(dim);
  e(index) = 1.0;
  return e;
}

/// (1, v): the full representation of a normalized vector with Bloch part v.
inline Vec with_normalization(const Vec& v) {
  Vec out(v.size() + 1);
  out(0) = 1.0;
  out.tail(v.size()) = v;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Symmetric square root of a positive semidefinite matrix.
inline Mat psd_sqrt(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (x + x.transpose()));
  const Vec roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

/// Orthonormal basis of the orthogonal complement of a unit vector.
inline Mat complement_basis(const Vec& u) {
  const int d = static_cast<int>(u.size());
  Mat m(d, d);
  m.col(0) = u.normalized();
  // Fill with the standard basis, then Gram-Schmidt; skip the vector most parallel to u.
  Eigen::Index skip = 0;
  u.cwiseAbs().maxCoeff(&skip);
  int col = 1;
  for (int k = 0; k < d && col < d; ++k) {
    if (k == skip) continue;
    m.col(col++) = unit_vector(d, k);
  }
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ();
  // First column of q is +-u; the rest span the complement.
  return q.rightCols(d - 1);
}

}  // namespace dirbit
