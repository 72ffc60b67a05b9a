#pragma once

// Rotation group machinery: Haar sampling on SO(d) (O(1) for d = 1),
// stabilizer averaging, the noisiness order on ball states together with LP
// certificates, and invariant inner products of sampled representations.

#include "dirbit/common.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/lp.hpp"
#include "dirbit/random.hpp"

#include <optional>
#include <vector>

namespace dirbit {

/// Element of SO(d); for d = 1 the group is O(1) = {+1, -1}.
class Rotation {
 public:
  explicit Rotation(Mat matrix) : m_(std::move(matrix)) {
    require(m_.rows() == m_.cols() && m_.rows() >= 1, "Rotation: matrix must be square");
    require(orthogonality_defect(m_) <= kUnitTol, "Rotation: matrix is not orthogonal");
    if (m_.rows() >= 2) require(m_.determinant() > 0.0, "Rotation: determinant must be +1");
  }

  static Rotation identity(int d) { return Rotation(Mat::Identity(d, d)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  Vec operator*(const Vec& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
  Rotation inverse() const { return Rotation(m_.transpose()); }

 private:
  Mat m_;
};

/// Haar-random rotation: QR of a Gaussian matrix with the diagonal sign
/// correction, then one column negated if the determinant is -1.
inline Rotation haar_sample(int d, std::uint64_t seed) {
  require(d >= 1, "haar_sample: d must be >= 1");
  Rng rng = make_rng(seed);
  if (d == 1) return Rotation(Mat::Constant(1, 1, random_unit_vector(1, rng)(0)));
  const Mat g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return Rotation(q);
}

/// Rotation by theta in the (i, j) coordinate plane.
inline Rotation planar_rotation(int d, int i, int j, double theta) {
  Mat m = Mat::Identity(d, d);
  m(i, i) = std::cos(theta);
  m(j, j) = std::cos(theta);
  m(j, i) = std::sin(theta);
  m(i, j) = -std::sin(theta);
  return Rotation(m);
}

/// A rotation taking unit vector u to unit vector v, acting only on span{u, v}.
inline Rotation rotation_taking(const Vec& u, const Vec& v) {
  const int d = static_cast<int>(u.size());
  require(v.size() == d, "rotation_taking: dimension mismatch");
  const Vec a = u.normalized();
  const Vec b = v.normalized();
  if (d == 1) return Rotation(Mat::Constant(1, 1, a(0) * b(0) > 0 ? 1.0 : -1.0));
  const double cos_t = std::clamp(a.dot(b), -1.0, 1.0);
  if (cos_t > 1.0 - 1e-15) return Rotation::identity(d);
  Vec w = b - cos_t * a;
  if (w.norm() < 1e-12) {
    // Antipodal: rotate by pi in a plane containing u.
    const Vec perp = complement_basis(a).col(0);
    return Rotation(Mat::Identity(d, d) - 2.0 * a * a.transpose() - 2.0 * perp * perp.transpose());
  }
  w.normalize();
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  Mat m = Mat::Identity(d, d) + (cos_t - 1.0) * (a * a.transpose() + w * w.transpose()) +
          sin_t * (w * a.transpose() - a * w.transpose());
  return Rotation(m);
}

/// The 24 proper symmetries of the cube: an exact finite subgroup of SO(3)
/// whose defining representation is irreducible.
inline std::vector<Rotation> octahedral_group() {
  std::vector<Rotation> out;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms)
    for (int signs = 0; signs < 8; ++signs) {
      Mat m = Mat::Zero(3, 3);
      for (int r = 0; r < 3; ++r) m(r, p[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
      if (m.determinant() > 0) out.emplace_back(m);
    }
  return out;
}

/// Action of a physical rotation on Bloch vectors: O R O^T.
inline Mat bloch_action(const BallSpace& space, const Rotation& r) {
  require(r.dim() == space.dim(), "bloch_action: dimension mismatch");
  return space.frame_map() * r.matrix() * space.frame_map().transpose();
}

/// Block action 1 (+) O R O^T on the (d+1)-dimensional state space.
inline Mat state_action(const BallSpace& space, const Rotation& r) {
  Mat g = Mat::Identity(space.dim() + 1, space.dim() + 1);
  g.bottomRightCorner(space.dim(), space.dim()) = bloch_action(space, r);
  return g;
}

inline BallState act(const BallSpace& space, const Rotation& r, const BallState& s) {
  check_state_dim(space, s);
  return BallState(bloch_action(space, r) * s.bloch());
}

// ---------------------------------------------------------------------------
// Stabilizer averaging

struct StabilizerAverage {
  BallState state;
  double standard_error = 0.0;  ///< zero for the exact quadratures (d <= 3)
  int samples = 0;
};

/// Average of G_R omega over rotations R with R y = y. Exact for d <= 3
/// (trivial group for d <= 2, equally spaced circle quadrature for d = 3);
/// Monte Carlo over SO(d-1) for d >= 4.
inline StabilizerAverage stabilizer_average(const BallSpace& space, const BallState& state, const Vec& y,
                                            int quadrature_size, std::uint64_t seed = 0) {
  check_state_dim(space, state);
  require(y.size() == space.dim(), "stabilizer_average: direction has the wrong dimension");
  require_unit(y, "stabilizer_average direction");
  const int d = space.dim();
  if (d <= 2) return {state, 0.0, 1};
  require(quadrature_size >= 2, "stabilizer_average: quadrature_size must be >= 2 for d >= 3");

  const Vec axis = space.bloch_direction(y);
  const Vec b = state.bloch();
  const Vec along = axis.dot(b) * axis;
  const Vec transverse = b - along;
  if (d == 3) {
    const Vec cross = axis.head<3>().cross(transverse.head<3>());
    Vec sum = Vec::Zero(3);
    for (int k = 0; k < quadrature_size; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / quadrature_size;
      sum += along + std::cos(theta) * transverse + std::sin(theta) * cross;
    }
    return {BallState(sum / quadrature_size), 0.0, quadrature_size};
  }
  const Mat basis = complement_basis(axis);
  const Vec coords = basis.transpose() * transverse;
  Mat images(d, quadrature_size);
  for (int k = 0; k < quadrature_size; ++k) {
    const Rotation q = haar_sample(d - 1, derive_seed(seed, k));
    images.col(k) = along + basis * (q.matrix() * coords);
  }
  const Vec mean = images.rowwise().mean();
  const Vec centered_sq = (images.colwise() - mean).array().square().rowwise().sum();
  const double se = quadrature_size > 1 ? std::sqrt(centered_sq.sum() / (quadrature_size - 1.0) / quadrature_size) : 0.0;
  // Monte Carlo noise can push the mean marginally outside the ball; |mean| <= |b| holds exactly.
  Vec clipped = mean;
  if (clipped.norm() > b.norm()) clipped *= b.norm() / clipped.norm();
  return {BallState(clipped), se, quadrature_size};
}

// ---------------------------------------------------------------------------
// Noisiness order

/// phi is at least as noisy as omega: |phi| <= |omega| (+ 1e-9).
inline bool majorization_le(const BallSpace& space, const BallState& phi, const BallState& omega) {
  check_state_dim(space, phi);
  check_state_dim(space, omega);
  return phi.norm() <= omega.norm() + kMembershipTol;
}

struct MajorizationCertificate {
  std::vector<double> weights;
  std::vector<Rotation> rotations;
  double residual = 0.0;  ///< Euclidean |sum_j w_j G_{R_j} omega - phi|
};

/// Best L1 fit of phi by a convex mixture of the given rotations applied to omega.
inline MajorizationCertificate certificate_lp(const BallSpace& space, const BallState& phi, const BallState& omega,
                                              const std::vector<Rotation>& pool) {
  require(!pool.empty(), "certificate_lp: empty rotation pool");
  const int d = space.dim();
  const int k = static_cast<int>(pool.size());
  Mat a = Mat::Zero(d + 1, k + 2 * d);
  Vec b(d + 1);
  for (int j = 0; j < k; ++j) {
    a.col(j).head(d) = bloch_action(space, pool[j]) * omega.bloch();
    a(d, j) = 1.0;
  }
  a.block(0, k, d, d) = -Mat::Identity(d, d);
  a.block(0, k + d, d, d) = Mat::Identity(d, d);
  b.head(d) = phi.bloch();
  b(d) = 1.0;
  Vec c = Vec::Zero(k + 2 * d);
  c.tail(2 * d).setOnes();
  const LpResult r = solve_lp(c, a, b);
  if (r.status != LpStatus::optimal) {
    throw NumericalError(std::string("majorization LP did not reach optimality: ") + to_string(r.status));
  }
  MajorizationCertificate cert;
  Vec mix = Vec::Zero(d);
  for (int j = 0; j < k; ++j) {
    if (r.x(j) <= 1e-12) continue;
    cert.weights.push_back(r.x(j));
    cert.rotations.push_back(pool[j]);
  }
  double total = 0.0;
  for (double w : cert.weights) total += w;
  for (std::size_t j = 0; j < cert.weights.size(); ++j) {
    cert.weights[j] /= total;
    mix += cert.weights[j] * (bloch_action(space, cert.rotations[j]) * omega.bloch());
  }
  cert.residual = (mix - phi.bloch()).norm();
  return cert;
}

/// Rotations that map omega's direction into span{omega, phi}: onto +-phi's
/// direction and onto the two points at angle acos(|phi|/|omega|) from it.
/// Mixtures of these reproduce phi exactly whenever |phi| <= |omega|.
inline std::vector<Rotation> aligned_rotation_pool(const BallSpace& space, const BallState& phi,
                                                   const BallState& omega) {
  const int d = space.dim();
  std::vector<Rotation> pool;
  if (omega.norm() < 1e-15) {
    pool.push_back(Rotation::identity(d));
    return pool;
  }
  const Vec w_hat = omega.bloch().normalized();
  const Vec e_hat = phi.norm() > 1e-12 ? Vec(phi.bloch().normalized()) : w_hat;
  auto to_physical = [&](const Rotation& bloch_rot) {
    return Rotation(space.frame_map().transpose() * bloch_rot.matrix() * space.frame_map());
  };
  pool.push_back(to_physical(rotation_taking(w_hat, e_hat)));
  pool.push_back(to_physical(rotation_taking(w_hat, -e_hat)));
  if (d >= 2) {
    const double cos_t = std::min(1.0, phi.norm() / omega.norm());
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    Vec perp = w_hat - w_hat.dot(e_hat) * e_hat;
    perp = perp.norm() > 1e-9 ? Vec(perp.normalized()) : Vec(complement_basis(e_hat).col(0));
    pool.push_back(to_physical(rotation_taking(w_hat, cos_t * e_hat + sin_t * perp)));
    pool.push_back(to_physical(rotation_taking(w_hat, cos_t * e_hat - sin_t * perp)));
  }
  pool.push_back(Rotation::identity(d));
  return pool;
}

/// Certificate that phi = sum_j w_j G_{R_j} omega, searched over `pool` Haar
/// rotations plus the aligned rotations. nullopt when the best residual
/// exceeds 1e-6 (always the case when |phi| > |omega|).
inline std::optional<MajorizationCertificate> majorization_certificate(const BallSpace& space, const BallState& phi,
                                                                      const BallState& omega, int pool,
                                                                      std::uint64_t seed) {
  check_state_dim(space, phi);
  check_state_dim(space, omega);
  require(pool >= 0, "majorization_certificate: pool must be non-negative");
  if (phi.norm() > omega.norm() + kMembershipTol) return std::nullopt;
  std::vector<Rotation> rotations = aligned_rotation_pool(space, phi, omega);
  for (int j = 0; j < pool; ++j) rotations.push_back(haar_sample(space.dim(), derive_seed(seed, j)));
  MajorizationCertificate cert = certificate_lp(space, phi, omega, rotations);
  if (cert.residual > 1e-6) return std::nullopt;
  return cert;
}

// ---------------------------------------------------------------------------
// Invariant inner products

struct InvariantInnerProduct {
  Mat gram;                      ///< X = mean of G^T G
  double sampling_error = 0.0;   ///< standard error of that mean (Frobenius)
  double max_invariance_defect = 0.0;  ///< max_k |G_k^T X G_k - X|_F
  double closure_deviation = 0.0;      ///< max relative distance of G_i G_j to the sample set
  bool invariant_within_error = false; ///< defect <= 10 x sampling error
};

inline InvariantInnerProduct invariant_inner_product(const std::vector<Mat>& samples, std::uint64_t seed = 0,
                                                     int closure_checks = 100) {
  require(!samples.empty(), "invariant_inner_product: no samples");
  const Eigen::Index n = samples.front().rows();
  for (const Mat& g : samples) require(g.rows() == n && g.cols() == n, "invariant_inner_product: inconsistent sizes");
  const double count = static_cast<double>(samples.size());

  InvariantInnerProduct out;
  out.gram = Mat::Zero(n, n);
  for (const Mat& g : samples) out.gram += g.transpose() * g;
  out.gram /= count;
  if (samples.size() > 1) {
    double spread = 0.0;
    for (const Mat& g : samples) spread += (g.transpose() * g - out.gram).squaredNorm();
    out.sampling_error = std::sqrt(spread / (count - 1.0) / count);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(out.gram);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff())) {
    throw DegenerateError("invariant_inner_product: averaged Gram matrix is not positive definite");
  }
  for (const Mat& g : samples) {
    out.max_invariance_defect =
        std::max(out.max_invariance_defect, (g.transpose() * out.gram * g - out.gram).norm());
  }
  out.invariant_within_error =
      out.max_invariance_defect <= 10.0 * out.sampling_error + 1e-12 * out.gram.norm();

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  for (int t = 0; t < closure_checks; ++t) {
    const Mat prod = samples[pick(rng)] * samples[pick(rng)];
    double best = std::numeric_limits<double>::infinity();
    for (const Mat& g : samples) best = std::min(best, (prod - g).norm());
    out.closure_deviation = std::max(out.closure_deviation, best / std::max(prod.norm(), 1e-300));
  }
  return out;
}

}  // namespace dirbit
