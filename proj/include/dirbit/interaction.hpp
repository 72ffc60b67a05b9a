#pragma once

// Generators of joint dynamics on two noiseless d-balls. A generator acts on
// the (d+1)^2-dimensional tensor space in the A-first order used by
// BipartiteVector; in this basis local rotations are orthogonal, so valid
// generators are antisymmetric and annihilate the normalization component.

#include "dirbit/common.hpp"
#include "dirbit/composite.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/parallel.hpp"
#include "dirbit/pauli.hpp"
#include "dirbit/protocol.hpp"
#include "dirbit/random.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace dirbit {

class Generator {
 public:
  Generator(int d, Mat w) : d_(d), w_(std::move(w)) {
    require(d_ >= 1, "Generator: d must be >= 1");
    const int n = (d_ + 1) * (d_ + 1);
    require(w_.rows() == n && w_.cols() == n, "Generator: matrix must be (d+1)^2 square");
    require(w_.row(0).cwiseAbs().maxCoeff() <= 1e-12, "Generator: does not preserve normalization");
    require(antisymmetry_defect(w_) <= 1e-10, "Generator: not antisymmetric in the canonical gauge");
  }

  static Generator zero(int d) { return Generator(d, Mat::Zero((d + 1) * (d + 1), (d + 1) * (d + 1))); }

  int dim() const { return d_; }
  const Mat& matrix() const { return w_; }
  Mat exp(double t) const {
    const Mat e = (t * w_).exp();
    if (!e.allFinite()) throw NumericalError("Generator::exp: matrix exponential is not finite");
    return e;
  }

 private:
  int d_;
  Mat w_;
};

/// 0 (+) X on the (d+1)-dimensional local space.
inline Mat embed_local(const Mat& x) {
  Mat out = Mat::Zero(x.rows() + 1, x.cols() + 1);
  out.bottomRightCorner(x.rows(), x.cols()) = x;
  return out;
}

/// X^A (x) 1 + 1 (x) X^B: non-interacting dynamics.
inline Generator lift_local(const Mat& xa, const Mat& xb) {
  require(xa.rows() == xa.cols() && xb.rows() == xb.cols() && xa.rows() == xb.rows(),
          "lift_local: local generators must be square of equal size");
  require(antisymmetry_defect(xa) <= 1e-10 && antisymmetry_defect(xb) <= 1e-10,
          "lift_local: local generators must be antisymmetric (gauge)");
  const int d = static_cast<int>(xa.rows());
  const Mat id = Mat::Identity(d + 1, d + 1);
  return Generator(d, kron(embed_local(xa), id) + kron(id, embed_local(xb)));
}

// ---------------------------------------------------------------------------
// Sector decomposition

namespace detail {

// Tensor indices of the four sectors: normalization, B-local (0, j), A-local
// (i, 0), correlations (i, j), each in natural order.
struct Sectors {
  std::vector<int> scalar, b_local, a_local, corr;
};

inline Sectors sectors(int d) {
  Sectors s;
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j) {
      const int k = i * (d + 1) + j;
      if (i == 0 && j == 0) s.scalar.push_back(k);
      else if (i == 0) s.b_local.push_back(k);
      else if (j == 0) s.a_local.push_back(k);
      else s.corr.push_back(k);
    }
  return s;
}

inline Mat submatrix(const Mat& w, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = w(rows[r], cols[c]);
  return out;
}

}  // namespace detail

struct BlockDecomposition {
  double scalar = 0.0;
  Mat y;  ///< B-local block, d x d
  Mat x;  ///< A-local block, d x d
  Mat z;  ///< correlation block, d^2 x d^2
  Mat v;  ///< X (x) 1 + 1 (x) Y - Z
  double off_block_norm = 0.0;  ///< Frobenius norm of all couplings between sectors
  bool block_diagonal() const { return off_block_norm <= 1e-10; }
};

inline BlockDecomposition decompose(const Generator& g) {
  const int d = g.dim();
  const detail::Sectors s = detail::sectors(d);
  const Mat& w = g.matrix();
  BlockDecomposition out;
  out.scalar = w(0, 0);
  out.y = detail::submatrix(w, s.b_local, s.b_local);
  out.x = detail::submatrix(w, s.a_local, s.a_local);
  out.z = detail::submatrix(w, s.corr, s.corr);
  const Mat id = Mat::Identity(d, d);
  out.v = kron(out.x, id) + kron(id, out.y) - out.z;
  const std::vector<int> label = [&] {
    std::vector<int> l(w.rows());
    for (int k : s.scalar) l[k] = 0;
    for (int k : s.b_local) l[k] = 1;
    for (int k : s.a_local) l[k] = 2;
    for (int k : s.corr) l[k] = 3;
    return l;
  }();
  double off = 0.0;
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      if (label[r] != label[c]) off += w(r, c) * w(r, c);
  out.off_block_norm = std::sqrt(off);
  return out;
}

/// diag(0, Y, X, Z) placed into the sectors.
inline Generator block_diagonal_generator(const Mat& x, const Mat& y, const Mat& z) {
  const int d = static_cast<int>(x.rows());
  require(x.cols() == d && y.rows() == d && y.cols() == d && z.rows() == d * d && z.cols() == d * d,
          "block_diagonal_generator: block sizes do not match");
  const detail::Sectors s = detail::sectors(d);
  const int n = (d + 1) * (d + 1);
  Mat w = Mat::Zero(n, n);
  auto place = [&](const Mat& block, const std::vector<int>& idx) {
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) w(idx[r], idx[c]) = block(r, c);
  };
  place(y, s.b_local);
  place(x, s.a_local);
  place(z, s.corr);
  return Generator(d, w);
}

// ---------------------------------------------------------------------------
// Circuit probabilities

namespace detail {

inline void require_noiseless(const BallSpace& space, int d, const std::string& who) {
  require(space.dim() == d, who + ": space dimension does not match the generator");
  require(space.is_noiseless(), who + ": needs a noiseless space; lift noisy effects first");
}

// omega_x (x) omega_y and the matching product of spin effects.
inline Vec product_point(const BallSpace& s, const Vec& x, const Vec& y) {
  require_unit(x, "x");
  require_unit(y, "y");
  return kron(with_normalization(s.bloch_direction(x)), with_normalization(s.bloch_direction(y)));
}

}  // namespace detail

/// M_x (x) M_y (e^{tW} omega_x (x) omega_y).
inline double circuit_f(const BallSpace& space, const Generator& w, const Vec& x, const Vec& y, double t) {
  detail::require_noiseless(space, w.dim(), "circuit_f");
  const Vec p = detail::product_point(space, x, y);
  return 0.25 * p.dot(w.exp(t) * p);
}

inline double circuit_f(const Generator& w, const Vec& x, const Vec& y, double t) {
  return circuit_f(BallSpace::noiseless(w.dim()), w, x, y, t);
}

struct DerivativeReport {
  std::vector<double> first;   ///< analytic f'(0)
  std::vector<double> second;  ///< analytic f''(0)
  double max_abs_first = 0.0;
  double max_second = -std::numeric_limits<double>::infinity();
  double max_fd_discrepancy = 0.0;  ///< scaled, see derivative_constraints
  double fd_step = 1e-4;
};

/// Analytic first and second derivatives of circuit_f at t = 0, cross-checked
/// by central differences of the exponential. Discrepancies are measured
/// relative to max(1, |W|) and max(1, |W|^2).
inline DerivativeReport derivative_constraints(const BallSpace& space, const Generator& w,
                                               const std::vector<std::pair<Vec, Vec>>& samples) {
  detail::require_noiseless(space, w.dim(), "derivative_constraints");
  DerivativeReport out;
  const double h = out.fd_step;
  const Mat& m = w.matrix();
  const Mat ep = w.exp(h);
  const Mat em = w.exp(-h);
  const double s1 = std::max(1.0, m.norm());
  const double s2 = std::max(1.0, m.squaredNorm());
  for (const auto& [x, y] : samples) {
    const Vec p = detail::product_point(space, x, y);
    const Vec wp = m * p;
    const double f1 = 0.25 * p.dot(wp);
    const double f2 = 0.25 * p.dot(m * wp);
    const double fp = 0.25 * p.dot(ep * p);
    const double fm = 0.25 * p.dot(em * p);
    const double fd1 = (fp - fm) / (2.0 * h);
    const double fd2 = (fp - 2.0 * 0.25 * p.squaredNorm() + fm) / (h * h);
    out.first.push_back(f1);
    out.second.push_back(f2);
    out.max_abs_first = std::max(out.max_abs_first, std::abs(f1));
    out.max_second = std::max(out.max_second, f2);
    out.max_fd_discrepancy =
        std::max({out.max_fd_discrepancy, std::abs(f1 - fd1) / s1, std::abs(f2 - fd2) / s2});
  }
  if (out.max_fd_discrepancy > 1e-6) {
    throw NumericalError("derivative_constraints: analytic and finite-difference derivatives disagree (" +
                         std::to_string(out.max_fd_discrepancy) + ")");
  }
  return out;
}

inline DerivativeReport derivative_constraints(const Generator& w, const std::vector<std::pair<Vec, Vec>>& samples) {
  return derivative_constraints(BallSpace::noiseless(w.dim()), w, samples);
}

/// Random pairs of unit vectors, reproducible from the seed.
inline std::vector<std::pair<Vec, Vec>> random_direction_pairs(int d, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<std::pair<Vec, Vec>> out;
  for (int k = 0; k < count; ++k) {
    Vec x = random_unit_vector(d, rng);
    Vec y = random_unit_vector(d, rng);
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Admissibility

struct ScanOptions {
  int pairs = 400;     ///< random (x, y) preparations
  int times = 16;      ///< nonzero times, split evenly between signs
  double t_max = std::numbers::pi;
  int effect_grid = 200;  ///< directions for B's effect; A's is minimized exactly
  int max_samples = 10000;
  std::uint64_t seed = 0;
};

struct ScanWitness {
  Vec x, y;  ///< preparation directions
  double t = 0.0;
  Vec u, v;  ///< effect directions on A and B
  double value = 0.0;  ///< probability of M_u (x) M_v, outside [0, 1]
  std::size_t sample_index = 0;
};

struct ScanResult {
  bool pass = true;
  std::optional<ScanWitness> witness;  ///< first violation in sample order
  std::size_t samples_checked = 0;
  int effect_grid = 0;
  double min_probability = std::numeric_limits<double>::infinity();
  double max_probability = -std::numeric_limits<double>::infinity();
};

/// Evolves product states of pure directions under e^{tW} and checks that
/// every product of spin effects has probability in [0, 1]. For A's effect
/// the extremes over the sphere are exact; B's effect runs over a grid that
/// also contains +-y. Conditional states of A after any B-effect are inside
/// the ball exactly when those products are non-negative, so this covers the
/// conditioning constraints at the same resolution.
inline ScanResult admissibility_scan(const BallSpace& space, const Generator& w, const ScanOptions& opt = {},
                                     const std::vector<std::pair<Vec, Vec>>& first_pairs = {}) {
  detail::require_noiseless(space, w.dim(), "admissibility_scan");
  require(opt.times >= 1 && opt.pairs >= 0 && opt.effect_grid >= 1, "admissibility_scan: bad options");
  const int d = w.dim();
  std::vector<std::pair<Vec, Vec>> pairs = first_pairs;
  const auto extra = random_direction_pairs(d, opt.pairs, derive_seed(opt.seed, 1));
  pairs.insert(pairs.end(), extra.begin(), extra.end());
  const int half = (opt.times + 1) / 2;
  std::vector<double> times;
  for (int k = 1; k <= half; ++k) {
    times.push_back(opt.t_max * k / half);
    times.push_back(-opt.t_max * k / half);
  }
  times.resize(opt.times);
  const std::size_t per_pair = times.size();
  const std::size_t max_pairs = static_cast<std::size_t>(opt.max_samples) / per_pair;
  if (pairs.size() > max_pairs) pairs.resize(max_pairs);
  std::vector<Mat> evo;
  for (double t : times) evo.push_back(w.exp(t));
  std::vector<Vec> grid;
  if (d == 1) {
    grid = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    grid = default_directions(d, std::max(opt.effect_grid, d + 1), derive_seed(opt.seed, 2));
  }

  struct PairOutcome {
    std::optional<ScanWitness> witness;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
  };
  std::vector<PairOutcome> outcome(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t pi) {
    const auto& [x, y] = pairs[pi];
    const Vec p = detail::product_point(space, x, y);
    std::vector<Vec> effects = grid;
    effects.push_back(space.bloch_direction(y));
    effects.push_back(-space.bloch_direction(y));
    PairOutcome& o = outcome[pi];
    for (std::size_t ti = 0; ti < per_pair && !o.witness; ++ti) {
      const Vec c = evo[ti] * p;
      Mat cm(d + 1, d + 1);
      for (int i = 0; i <= d; ++i) cm.row(i) = c.segment(i * (d + 1), d + 1).transpose();
      for (const Vec& v : effects) {
        const Vec a = 0.5 * cm * with_normalization(v);  // A-side vector after B's effect M_v
        const double n = a.tail(d).norm();
        const double lo = 0.5 * (a(0) - n);
        const double hi = 0.5 * (a(0) + n);
        o.lo = std::min(o.lo, lo);
        o.hi = std::max(o.hi, hi);
        if (lo < -1e-9 || hi > 1.0 + 1e-9) {
          ScanWitness wit;
          wit.x = x;
          wit.y = y;
          wit.t = times[ti];
          wit.v = space.physical_direction(v);
          const Vec dir = n > 0.0 ? Vec(a.tail(d) / n) : unit_vector(d, 0);
          wit.u = space.physical_direction(lo < -1e-9 ? Vec(-dir) : dir);
          wit.value = lo < -1e-9 ? lo : hi;
          wit.sample_index = pi * per_pair + ti;
          o.witness = wit;
          break;
        }
      }
    }
  });
  ScanResult out;
  out.effect_grid = static_cast<int>(grid.size()) + 2;
  for (const PairOutcome& o : outcome) {
    out.min_probability = std::min(out.min_probability, o.lo);
    out.max_probability = std::max(out.max_probability, o.hi);
    if (o.witness && !out.witness) {
      out.witness = o.witness;
      out.pass = false;
    }
  }
  out.samples_checked = out.witness ? out.witness->sample_index + 1 : pairs.size() * per_pair;
  return out;
}

inline ScanResult admissibility_scan(const Generator& w, const ScanOptions& opt = {},
                                     const std::vector<std::pair<Vec, Vec>>& first_pairs = {}) {
  return admissibility_scan(BallSpace::noiseless(w.dim()), w, opt, first_pairs);
}

// ---------------------------------------------------------------------------
// Block-diagonal generators

struct BlockRejectResult {
  bool pass = false;  ///< true only for V = 0
  std::optional<std::pair<Vec, Vec>> witness;  ///< unit (a, b) with (a(x)b) V^2 (a(x)b) < 0
  double value = 0.0;
  double trace_v2 = 0.0;
  double frobenius_sq = 0.0;
  std::string method;  ///< "dominant-mode" or "basis-pair"
};

/// For antisymmetric V on R^d (x) R^d, finds a product vector on which the
/// second-order constraint (a(x)b) V^2 (a(x)b) >= 0 fails.
inline BlockRejectResult block_reject(const Mat& v) {
  require(v.rows() == v.cols(), "block_reject: V must be square");
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.rows()))));
  require(d * d == v.rows() && d >= 1, "block_reject: V must act on R^d (x) R^d");
  require(antisymmetry_defect(v) <= 1e-10, "block_reject: V must be antisymmetric");
  BlockRejectResult out;
  const Mat v2 = v * v;
  out.trace_v2 = v2.trace();
  out.frobenius_sq = v.squaredNorm();
  if (v.norm() <= 1e-10) {
    out.pass = true;
    return out;
  }
  auto q = [&](const Vec& a, const Vec& b) {
    const Vec p = kron(a, b);
    return p.dot(v2 * p);
  };
  const double tol = 1e-14 * out.frobenius_sq;
  // Dominant eigenvector of -V^2, reshaped, gives the best rank-one candidate.
  const Eigen::SelfAdjointEigenSolver<Mat> eig(-0.5 * (v2 + v2.transpose()));
  const Vec top = eig.eigenvectors().col(eig.eigenvalues().size() - 1);
  Mat shaped(d, d);
  for (int i = 0; i < d; ++i) shaped.row(i) = top.segment(i * d, d).transpose();
  Eigen::JacobiSVD<Mat> svd(shaped, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec a0 = svd.matrixU().col(0);
  const Vec b0 = svd.matrixV().col(0);
  const double val0 = q(a0, b0);
  if (val0 < -tol) {
    out.witness = std::make_pair(a0, b0);
    out.value = val0;
    out.method = "dominant-mode";
    return out;
  }
  // Basis pairs sum to tr(V^2) = -|V|_F^2 < 0, so one of them is negative.
  double best = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double val = q(unit_vector(d, i), unit_vector(d, j));
      if (val < best) {
        best = val;
        out.witness = std::make_pair(unit_vector(d, i), unit_vector(d, j));
      }
    }
  if (!out.witness || best >= -tol) {
    throw VerificationFailure("block_reject: no witness found for nonzero V");
  }
  out.value = best;
  out.method = "basis-pair";
  return out;
}

struct BlockDiagonalRejection {
  BlockDecomposition blocks;
  BlockRejectResult second_order;
  ScanResult scan;  ///< admissibility of diag(0, 0, 0, V), which W forces into the algebra
};

/// A block-diagonal W together with the local rotations X, Y generates
/// diag(0, 0, 0, V). The second-order witness of V is fed first into an
/// admissibility scan of that generator.
inline BlockDiagonalRejection reject_block_diagonal(const Generator& w, const ScanOptions& opt = {}) {
  BlockDiagonalRejection out;
  out.blocks = decompose(w);
  require(out.blocks.block_diagonal(), "reject_block_diagonal: generator is not block-diagonal");
  out.second_order = block_reject(out.blocks.v);
  if (out.second_order.pass) {
    out.scan.pass = true;
    return out;
  }
  const int d = w.dim();
  const Mat zero = Mat::Zero(d, d);
  const Generator derived = block_diagonal_generator(zero, zero, out.blocks.v);
  out.scan = admissibility_scan(derived, opt, {*out.second_order.witness});
  return out;
}

/// Random block-diagonal generator with |V|_F = 1.
inline Generator random_block_diagonal(int d, std::uint64_t seed) {
  require(d >= 2, "random_block_diagonal: needs d >= 2 for a nonzero V");
  Rng rng = make_rng(seed);
  const Mat x = random_antisymmetric(d, rng);
  const Mat y = random_antisymmetric(d, rng);
  Mat v = random_antisymmetric(d * d, rng);
  v /= v.norm();
  const Mat id = Mat::Identity(d, d);
  return block_diagonal_generator(x, y, kron(x, id) + kron(id, y) - v);
}

// ---------------------------------------------------------------------------
// Two-qubit generators

/// W with entries (1/4) tr(sigma_mu nu (-i)[H, sigma_alpha beta]) in the Pauli
/// coefficient basis; e^{tW} on coefficients is e^{-iHt} . e^{iHt} on rho.
inline Generator quantum_generator(const CMat& h) {
  require(h.rows() == 4 && h.cols() == 4, "quantum_generator: H must be 4x4");
  require(hermiticity_defect(h) <= 1e-12, "quantum_generator: H must be Hermitian");
  const Complex mi(0.0, -1.0);
  std::vector<CMat> basis;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) basis.push_back(pauli2(mu, nu));
  Mat w(16, 16);
  for (int c = 0; c < 16; ++c) {
    const CMat comm = mi * (h * basis[c] - basis[c] * h);
    for (int r = 0; r < 16; ++r) w(r, c) = 0.25 * (basis[r] * comm).trace().real();
  }
  return Generator(3, w);
}

/// e^{tW} applied to a bipartite state.
inline BipartiteVector evolve(const Generator& w, const BipartiteVector& s, double t) {
  require(s.dim_a() == w.dim() && s.dim_b() == w.dim(), "evolve: dimensions do not match");
  return BipartiteVector(w.dim(), w.dim(), w.exp(t) * s.coefficients());
}

// ---------------------------------------------------------------------------
// Feasible generators from first-order constraints

struct FeasibleSpaceReport {
  int d = 0;
  int samples = 0;
  int parameters = 0;          ///< antisymmetric, normalization-preserving matrices
  int feasible_dim = 0;
  int feasible_dim_half = 0;   ///< same system with the first half of the samples
  int local_dim = 0;           ///< d (d - 1)
  int intersection_dim = 0;    ///< feasible space meets the lifted-local subspace
  bool inconclusive = false;
  double singular_gap = 0.0;   ///< smallest kept / largest discarded singular value
  std::vector<Mat> basis;                  ///< feasible generators
  std::vector<Mat> nonlocal_directions;    ///< orthogonal to the local subspace
  std::vector<ScanResult> nonlocal_verdicts;
};

namespace detail {

inline std::vector<std::pair<int, int>> antisymmetric_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int p = 1; p < n; ++p)
    for (int q = p + 1; q < n; ++q) out.emplace_back(p, q);
  return out;
}

inline Mat from_parameters(const Vec& theta, const std::vector<std::pair<int, int>>& pairs, int n) {
  Mat w = Mat::Zero(n, n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    w(pairs[k].first, pairs[k].second) = theta(k);
    w(pairs[k].second, pairs[k].first) = -theta(k);
  }
  return w;
}

inline Vec to_parameters(const Mat& w, const std::vector<std::pair<int, int>>& pairs) {
  Vec theta(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) theta(k) = w(pairs[k].first, pairs[k].second);
  return theta;
}

// Rows r^T W p = 0 for every effect r vanishing on the product state p:
// (1, -x) (x) e_k and e_k (x) (1, -y).
inline Mat first_order_rows(int d, const std::vector<std::pair<Vec, Vec>>& samples,
                            const std::vector<std::pair<int, int>>& pairs) {
  const int n = (d + 1) * (d + 1);
  Mat k(2 * (d + 1) * static_cast<int>(samples.size()), pairs.size());
  int row = 0;
  for (const auto& [x, y] : samples) {
    const Vec px = with_normalization(x);
    const Vec py = with_normalization(y);
    const Vec p = kron(px, py);
    Vec nx = px;
    nx.tail(d) *= -1.0;
    Vec ny = py;
    ny.tail(d) *= -1.0;
    for (int e = 0; e <= d; ++e) {
      for (int side = 0; side < 2; ++side) {
        const Vec r = side == 0 ? kron(nx, Vec(unit_vector(d + 1, e))) : kron(Vec(unit_vector(d + 1, e)), ny);
        for (std::size_t c = 0; c < pairs.size(); ++c) {
          const auto [pi, qi] = pairs[c];
          k(row, c) = r(pi) * p(qi) - r(qi) * p(pi);
        }
        ++row;
      }
    }
  }
  (void)n;
  return k;
}

inline std::pair<Mat, double> null_space(const Mat& k, int columns) {
  if (k.rows() == 0) return {Mat::Identity(columns, columns), 0.0};
  Eigen::BDCSVD<Mat> svd(k, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double tol = 1e-9 * std::max(1.0, s(0));
  int rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  const double kept = rank > 0 ? s(rank - 1) : 0.0;
  const double dropped = rank < s.size() ? s(rank) : 0.0;
  const double gap = dropped > 0.0 ? kept / dropped : std::numeric_limits<double>::infinity();
  return {svd.matrixV().rightCols(columns - rank), gap};
}

}  // namespace detail

/// Solves the first-order constraints for sample_count random direction pairs
/// and classifies the solutions against the lifted-local subspace. Every
/// direction outside that subspace gets an admissibility scan.
inline FeasibleSpaceReport feasible_generator_space(int d, int sample_count, std::uint64_t seed,
                                                    const ScanOptions& scan = {}) {
  require(d >= 1, "feasible_generator_space: d must be >= 1");
  require(sample_count >= 1, "feasible_generator_space: need at least one sample");
  const int n = (d + 1) * (d + 1);
  const auto pairs = detail::antisymmetric_pairs(n);
  const int m = static_cast<int>(pairs.size());
  const auto samples = random_direction_pairs(d, sample_count, derive_seed(seed, 1));
  FeasibleSpaceReport out;
  out.d = d;
  out.samples = sample_count;
  out.parameters = m;
  const Mat k = detail::first_order_rows(d, samples, pairs);
  const auto [null, gap] = detail::null_space(k, m);
  out.singular_gap = gap;
  out.feasible_dim = static_cast<int>(null.cols());
  const std::vector<std::pair<Vec, Vec>> half(samples.begin(), samples.begin() + (sample_count + 1) / 2);
  out.feasible_dim_half = static_cast<int>(detail::null_space(detail::first_order_rows(d, half, pairs), m).first.cols());
  out.inconclusive = out.feasible_dim_half != out.feasible_dim || k.rows() < m;
  for (int c = 0; c < null.cols(); ++c) out.basis.push_back(detail::from_parameters(null.col(c), pairs, n));

  // Lifted-local subspace in parameter coordinates.
  std::vector<Vec> locals;
  for (int p = 0; p < d; ++p)
    for (int q = p + 1; q < d; ++q) {
      Mat e = Mat::Zero(d, d);
      e(p, q) = 1.0;
      e(q, p) = -1.0;
      locals.push_back(detail::to_parameters(lift_local(e, Mat::Zero(d, d)).matrix(), pairs));
      locals.push_back(detail::to_parameters(lift_local(Mat::Zero(d, d), e).matrix(), pairs));
    }
  out.local_dim = static_cast<int>(locals.size());
  Mat l(m, locals.size());
  for (std::size_t c = 0; c < locals.size(); ++c) l.col(c) = locals[c];
  auto rank_of = [](const Mat& a) {
    if (a.cols() == 0) return 0;
    Eigen::FullPivLU<Mat> lu(a);
    lu.setThreshold(1e-9);
    return static_cast<int>(lu.rank());
  };
  Mat both(m, null.cols() + l.cols());
  both << null, l;
  out.intersection_dim = rank_of(null) + rank_of(l) - rank_of(both);

  // Remove the local part and keep what is left of the feasible space.
  Mat residual = null;
  if (l.cols() > 0) {
    const Eigen::HouseholderQR<Mat> qr(l);
    const Mat ql = Mat(qr.householderQ()).leftCols(rank_of(l));
    residual -= ql * (ql.transpose() * null);
  }
  if (residual.cols() > 0) {
    Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeThinU);
    for (int c = 0; c < svd.singularValues().size(); ++c) {
      if (svd.singularValues()(c) <= 1e-8) break;
      Mat wdir = detail::from_parameters(svd.matrixU().col(c), pairs, n);
      wdir /= wdir.norm();
      out.nonlocal_directions.push_back(wdir);
    }
  }
  for (std::size_t c = 0; c < out.nonlocal_directions.size(); ++c) {
    ScanOptions o = scan;
    o.seed = derive_seed(scan.seed, c);
    out.nonlocal_verdicts.push_back(admissibility_scan(Generator(d, out.nonlocal_directions[c]), o));
  }
  return out;
}

}  // namespace dirbit
