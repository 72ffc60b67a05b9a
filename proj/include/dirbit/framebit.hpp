#pragma once

// Frame bits in d = 3: the convex hull of {(1, X) : X in SO(3)}. States are
// written (1, M) with M a real 3x3 matrix; the set is affinely isomorphic to
// the density matrices of 4-level real quantum theory.

#include "dirbit/common.hpp"
#include "dirbit/random.hpp"
#include "dirbit/so_group.hpp"

#include <array>
#include <cstdint>
#include <optional>

#include <boost/rational.hpp>

namespace dirbit {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

/// Real symmetric 4x4 density matrix.
class RealDensity4 {
 public:
  explicit RealDensity4(Mat u) : u_(std::move(u)) {
    require(u_.rows() == 4 && u_.cols() == 4, "RealDensity4: matrix must be 4x4");
    require((u_ - u_.transpose()).cwiseAbs().maxCoeff() <= kUnitTol, "RealDensity4: matrix must be symmetric");
    require(std::abs(u_.trace() - 1.0) <= 1e-12, "RealDensity4: trace must be 1");
    const Mat sym = 0.5 * (u_ + u_.transpose());
    require(Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff() >= -1e-10,
            "RealDensity4: matrix must be positive semidefinite");
  }

  const Mat& matrix() const { return u_; }

 private:
  Mat u_;
};

/// State (1, M) of the frame-bit space. Constructing one does not check
/// membership; use in_orbitope for that.
struct FrameBlochM {
  Mat m;

  explicit FrameBlochM(Mat matrix) : m(std::move(matrix)) {
    require(m.rows() == 3 && m.cols() == 3, "FrameBlochM: matrix must be 3x3");
  }
  static FrameBlochM pure(const Rotation& x) {
    require(x.dim() == 3, "FrameBlochM: rotation must be 3x3");
    return FrameBlochM(x.matrix());
  }
  static FrameBlochM center() { return FrameBlochM(Mat::Zero(3, 3)); }
};

namespace detail {

// The nine affine entries, written once for any scalar type. u(i, j) is
// zero-based and symmetric.
template <class T, class U>
std::array<std::array<T, 3>, 3> u_to_m_entries(const U& u) {
  const T two(2);
  return {{{u(0, 0) + u(1, 1) - u(2, 2) - u(3, 3), two * u(1, 2) - two * u(0, 3), two * u(0, 2) + two * u(1, 3)},
           {two * u(1, 2) + two * u(0, 3), u(0, 0) - u(1, 1) + u(2, 2) - u(3, 3), two * u(2, 3) - two * u(0, 1)},
           {two * u(1, 3) - two * u(0, 2), two * u(0, 1) + two * u(2, 3), u(0, 0) - u(1, 1) - u(2, 2) + u(3, 3)}}};
}

}  // namespace detail

/// The affine map on symmetric trace-one matrices. Positivity is not required.
inline Mat u_to_m_affine(const Mat& u) {
  require(u.rows() == 4 && u.cols() == 4, "u_to_m: matrix must be 4x4");
  require((u - u.transpose()).cwiseAbs().maxCoeff() <= kUnitTol, "u_to_m: matrix must be symmetric");
  const auto e = detail::u_to_m_entries<double>([&](int i, int j) { return u(i, j); });
  Mat m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = e[i][j];
  return m;
}

inline FrameBlochM u_to_m(const RealDensity4& u) { return FrameBlochM(u_to_m_affine(u.matrix())); }

/// Inverse of u_to_m_affine: the symmetric trace-one matrix mapped to M.
inline Mat m_to_u(const Mat& m) {
  require(m.rows() == 3 && m.cols() == 3, "m_to_u: matrix must be 3x3");
  Mat u(4, 4);
  u(0, 0) = (1.0 + m(0, 0) + m(1, 1) + m(2, 2)) / 4.0;
  u(1, 1) = (1.0 + m(0, 0) - m(1, 1) - m(2, 2)) / 4.0;
  u(2, 2) = (1.0 - m(0, 0) + m(1, 1) - m(2, 2)) / 4.0;
  u(3, 3) = (1.0 - m(0, 0) - m(1, 1) + m(2, 2)) / 4.0;
  u(1, 2) = u(2, 1) = (m(0, 1) + m(1, 0)) / 4.0;
  u(0, 3) = u(3, 0) = (m(1, 0) - m(0, 1)) / 4.0;
  u(1, 3) = u(3, 1) = (m(0, 2) + m(2, 0)) / 4.0;
  u(0, 2) = u(2, 0) = (m(0, 2) - m(2, 0)) / 4.0;
  u(2, 3) = u(3, 2) = (m(1, 2) + m(2, 1)) / 4.0;
  u(0, 1) = u(1, 0) = (m(2, 1) - m(1, 2)) / 4.0;
  return u;
}

inline RealDensity4 m_to_density(const FrameBlochM& m) { return RealDensity4(m_to_u(m.m)); }

/// Membership test through the real-density-matrix picture.
inline bool in_orbitope(const FrameBlochM& m, double tol = kMembershipTol) {
  return Eigen::SelfAdjointEigenSolver<Mat>(m_to_u(m.m)).eigenvalues().minCoeff() >= -tol;
}

/// Probability of the "yes" outcome of the frame measurement aligned to Y.
inline double frame_effect(const Rotation& y, const FrameBlochM& state) {
  require(y.dim() == 3, "frame_effect: Y must be in SO(3)");
  return ((y.matrix().transpose() * state.m).trace() + 1.0) / 4.0;
}

/// Frame effect for an unvalidated Y; rejects anything outside SO(3).
inline double frame_effect(const Mat& y, const FrameBlochM& state) { return frame_effect(Rotation(y), state); }

inline double trace_norm(const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues().sum(); }
inline double frobenius_norm(const Mat& m) { return m.norm(); }

struct FrameMaximizer {
  Rotation rotation = Rotation::identity(3);
  bool unique = false;
  double spectral_gap = 0.0;  ///< sigma_2 + det(P Q^T) sigma_3
  double value = 0.0;         ///< max of tr(Y^T M)
};

/// Maximizer of tr(Y^T M) over SO(3) by orthogonal Procrustes.
inline FrameMaximizer unique_maximizer(const FrameBlochM& state) {
  Eigen::JacobiSVD<Mat> svd(state.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& p = svd.matrixU();
  const Mat& q = svd.matrixV();
  const Vec& s = svd.singularValues();
  const double sign = (p * q.transpose()).determinant() > 0.0 ? 1.0 : -1.0;
  Mat dm = Mat::Identity(3, 3);
  dm(2, 2) = sign;
  Mat y = p * dm * q.transpose();
  // Re-orthonormalize against round-off before wrapping as a Rotation.
  Eigen::JacobiSVD<Mat> polar(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  y = polar.matrixU() * polar.matrixV().transpose();
  FrameMaximizer out;
  out.rotation = Rotation(y);
  out.spectral_gap = s(1) + sign * s(2);
  out.unique = out.spectral_gap > 1e-8;
  out.value = s(0) + s(1) + sign * s(2);
  return out;
}

/// Cross-check of unique_maximizer: best of `samples` Haar-random rotations.
inline FrameMaximizer sampled_maximizer(const FrameBlochM& state, int samples, std::uint64_t seed) {
  require(samples >= 1, "sampled_maximizer: need at least one sample");
  FrameMaximizer best;
  best.value = (state.m).trace();
  for (int k = 0; k < samples; ++k) {
    const Rotation r = haar_sample(3, derive_seed(seed, static_cast<std::uint64_t>(k)));
    const double v = (r.matrix().transpose() * state.m).trace();
    if (v > best.value) {
      best.value = v;
      best.rotation = r;
    }
  }
  return best;
}

struct FrameCodewordReport {
  Mat u;
  Mat m;
  std::array<Rational, 4> u_diagonal;
  std::array<Rational, 3> m_diagonal;
  Rational trace_norm_exact;
  Rational frobenius_squared_exact;
  double trace_norm = 0.0;
  double frobenius_norm = 0.0;
  FrameMaximizer maximizer;
  double sampled_best_value = 0.0;  ///< grid cross-check, never above maximizer.value
};

struct Assumption2Counterexample {
  FrameCodewordReport first;   ///< U = diag(6,4,2,1)/13
  FrameCodewordReport second;  ///< U' = diag(18,3,3,16)/40
  bool trace_norm_first_larger = false;
  bool frobenius_first_smaller = false;
};

namespace detail {

inline FrameCodewordReport diagonal_codeword(const std::array<Rational, 4>& diag, std::uint64_t seed) {
  FrameCodewordReport r;
  r.u_diagonal = diag;
  Rational trace(0);
  for (const Rational& x : diag) {
    if (x < Rational(0)) throw VerificationFailure("diagonal_codeword: negative density entry");
    trace += x;
  }
  if (trace != Rational(1)) throw VerificationFailure("diagonal_codeword: trace is not 1");
  const auto e = u_to_m_entries<Rational>([&](int i, int j) { return i == j ? diag[i] : Rational(0); });
  r.trace_norm_exact = Rational(0);
  r.frobenius_squared_exact = Rational(0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j)
      if (i != j && e[i][j] != Rational(0)) throw VerificationFailure("diagonal_codeword: M is not diagonal");
    r.m_diagonal[i] = e[i][i];
    r.trace_norm_exact += boost::abs(e[i][i]);
    r.frobenius_squared_exact += e[i][i] * e[i][i];
  }
  r.u = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) r.u(i, i) = to_double(diag[i]);
  const FrameBlochM m = u_to_m(RealDensity4(r.u));
  r.m = m.m;
  r.trace_norm = trace_norm(r.m);
  r.frobenius_norm = frobenius_norm(r.m);
  if (std::abs(r.trace_norm - to_double(r.trace_norm_exact)) > 1e-12 ||
      std::abs(r.frobenius_norm * r.frobenius_norm - to_double(r.frobenius_squared_exact)) > 1e-12) {
    throw VerificationFailure("diagonal_codeword: floating and exact norms disagree");
  }
  r.maximizer = unique_maximizer(m);
  if (!r.maximizer.unique || (r.maximizer.rotation.matrix() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() > 1e-12) {
    throw VerificationFailure("diagonal_codeword: identity is not the unique maximizer");
  }
  r.sampled_best_value = sampled_maximizer(m, 10000, seed).value;
  if (r.sampled_best_value > r.maximizer.value + 1e-12) {
    throw VerificationFailure("diagonal_codeword: sampled rotation beats the Procrustes maximizer");
  }
  return r;
}

}  // namespace detail

/// Two codewords for the identity frame, neither of which is a mixture of
/// rotations of the other: trace norm and Frobenius norm order them oppositely.
inline Assumption2Counterexample assumption2_counterexample(std::uint64_t seed = 0) {
  Assumption2Counterexample out;
  out.first = detail::diagonal_codeword({Rational(6, 13), Rational(4, 13), Rational(2, 13), Rational(1, 13)},
                                        derive_seed(seed, 1));
  out.second = detail::diagonal_codeword({Rational(18, 40), Rational(3, 40), Rational(3, 40), Rational(16, 40)},
                                         derive_seed(seed, 2));
  out.trace_norm_first_larger = out.first.trace_norm_exact > out.second.trace_norm_exact;
  out.frobenius_first_smaller = out.first.frobenius_squared_exact < out.second.frobenius_squared_exact;
  if (!out.trace_norm_first_larger || !out.frobenius_first_smaller) {
    throw VerificationFailure("assumption2_counterexample: norms are not oppositely ordered");
  }
  if (!(out.first.trace_norm > out.second.trace_norm && out.first.frobenius_norm < out.second.frobenius_norm)) {
    throw VerificationFailure("assumption2_counterexample: floating norms disagree with exact ordering");
  }
  return out;
}

}  // namespace dirbit
