#pragma once

// Ball state spaces of direction bits: states, effects, spin measurements,
// the noiseless lift, capacity of generic state spaces, and canonicalization
// of a sampled state space into Euclidean-ball form.

#include "dirbit/common.hpp"
#include "dirbit/lp.hpp"
#include "dirbit/random.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dirbit {

// ---------------------------------------------------------------------------
// Ball spaces, states, effects

/// Direction-bit state space: a d-dimensional unit ball with visibility a,
/// noise c, and an orthogonal frame map O from physical to Bloch directions.
class BallSpace {
 public:
  BallSpace(int dim, double visibility, double noise, Mat frame_map)
      : dim_(dim), visibility_(visibility), noise_(noise), frame_map_(std::move(frame_map)) {
    require(dim_ >= 1, "BallSpace: dimension must be >= 1");
    require(noise_ > 0.0 && noise_ < 1.0, "BallSpace: noise parameter c must lie in (0,1)");
    require(visibility_ > 0.0 && visibility_ <= 2.0 * std::min(noise_, 1.0 - noise_) + 1e-15,
            "BallSpace: visibility must satisfy 0 < a <= 2 min(c, 1-c)");
    require(frame_map_.rows() == dim_ && frame_map_.cols() == dim_,
            "BallSpace: frame map must be d x d");
    require(orthogonality_defect(frame_map_) <= kUnitTol, "BallSpace: frame map must be orthogonal");
  }

  explicit BallSpace(int dim, double visibility = 1.0, double noise = 0.5)
      : BallSpace(dim, visibility, noise, Mat::Identity(dim, dim)) {}

  static BallSpace noiseless(int dim) { return BallSpace(dim, 1.0, 0.5); }

  int dim() const { return dim_; }
  double visibility() const { return visibility_; }
  double noise() const { return noise_; }
  const Mat& frame_map() const { return frame_map_; }
  bool is_noiseless() const {
    return std::abs(visibility_ - 1.0) < 1e-12 && std::abs(noise_ - 0.5) < 1e-12;
  }

  /// Bloch direction of the pure codeword for physical direction x.
  Vec bloch_direction(const Vec& x) const { return frame_map_ * x; }
  /// Physical direction for a Bloch vector (inverse of the frame map).
  Vec physical_direction(const Vec& bloch) const { return frame_map_.transpose() * bloch; }

  BallSpace with_frame(Mat frame_map) const {
    return BallSpace(dim_, visibility_, noise_, std::move(frame_map));
  }

 private:
  int dim_;
  double visibility_;
  double noise_;
  Mat frame_map_;
};

/// Normalized ball state (1, bloch) with |bloch| <= 1.
class BallState {
 public:
  explicit BallState(Vec bloch) : bloch_(std::move(bloch)) {
    require(bloch_.size() >= 1, "BallState: empty Bloch vector");
    require(bloch_.norm() <= 1.0 + kUnitTol, "BallState: Bloch vector outside the unit ball");
  }

  static BallState maximally_mixed(int dim) { return BallState(Vec::Zero(dim)); }

  int dim() const { return static_cast<int>(bloch_.size()); }
  const Vec& bloch() const { return bloch_; }
  double norm() const { return bloch_.norm(); }
  bool is_pure(double tol = kMembershipTol) const { return std::abs(bloch_.norm() - 1.0) <= tol; }
  Vec full() const { return with_normalization(bloch_); }

 private:
  Vec bloch_;
};

/// Affine functional omega -> offset + <vector, bloch>.
struct BallEffect {
  double offset = 0.0;
  Vec vector;

  static BallEffect unit(int dim) { return {1.0, Vec::Zero(dim)}; }
  static BallEffect zero(int dim) { return {0.0, Vec::Zero(dim)}; }

  double operator()(const BallState& s) const { return offset + vector.dot(s.bloch()); }
  double min_on_ball() const { return offset - vector.norm(); }
  double max_on_ball() const { return offset + vector.norm(); }
  bool is_valid(double tol = kMembershipTol) const {
    return min_on_ball() >= -tol && max_on_ball() <= 1.0 + tol;
  }
  /// Covector on the (d+1)-dimensional space of unnormalized states.
  Vec covector() const {
    Vec out(vector.size() + 1);
    out(0) = offset;
    out.tail(vector.size()) = vector;
    return out;
  }
  BallEffect complement() const { return {1.0 - offset, -vector}; }
};

inline void check_state_dim(const BallSpace& space, const BallState& s) {
  require(s.dim() == space.dim(), "state dimension does not match the space");
}

/// Spin effect M_x for physical direction x: c + (a/2) <O x, bloch>.
inline BallEffect spin_effect_functional(const BallSpace& space, const Vec& x) {
  require(x.size() == space.dim(), "spin_effect: direction has the wrong dimension");
  require_unit(x, "spin_effect direction");
  return {space.noise(), 0.5 * space.visibility() * space.bloch_direction(x)};
}

inline double spin_effect(const BallSpace& space, const Vec& x, const BallState& state) {
  check_state_dim(space, state);
  return spin_effect_functional(space, x)(state);
}

/// L_z = M_z - M_{-z} = a <O z, bloch>.
inline double l_functional(const BallSpace& space, const Vec& z, const BallState& state) {
  check_state_dim(space, state);
  require(z.size() == space.dim(), "l_functional: direction has the wrong dimension");
  require_unit(z, "l_functional direction");
  return space.visibility() * space.bloch_direction(z).dot(state.bloch());
}

/// lambda * omega_x + (1 - lambda) * mu.
inline BallState codeword(const BallSpace& space, const Vec& x, double lambda) {
  require(x.size() == space.dim(), "codeword: direction has the wrong dimension");
  require_unit(x, "codeword direction");
  require(lambda >= 0.0 && lambda <= 1.0, "codeword: lambda must lie in [0,1]");
  return BallState(lambda * space.bloch_direction(x));
}

/// Raw affine rescaling (1/a) M + (1/2 - c/a) U, applied to any functional.
inline BallEffect noiseless_lift_affine(const BallSpace& space, const BallEffect& effect) {
  const double a = space.visibility();
  const double c = space.noise();
  return {effect.offset / a + 0.5 - c / a, effect.vector / a};
}

/// Lift of a binary spin measurement to the noiseless space (a' = 1, c' = 1/2).
/// Accepts a spin effect M_x, its complement U - M_x, or the unit effect U
/// (which maps to U). Any other functional is rejected.
inline BallEffect noiseless_lift(const BallSpace& space, const BallEffect& effect) {
  require(effect.vector.size() == space.dim(), "noiseless_lift: effect has the wrong dimension");
  require(effect.is_valid(), "noiseless_lift: effect is not valid on the ball");
  const double a = space.visibility();
  const double c = space.noise();
  const double tol = 1e-9;
  if (std::abs(effect.offset - 1.0) <= tol && effect.vector.norm() <= tol) return BallEffect::unit(space.dim());
  const bool radius_matches = std::abs(effect.vector.norm() - 0.5 * a) <= tol;
  if (radius_matches && std::abs(effect.offset - c) <= tol) return noiseless_lift_affine(space, effect);
  if (radius_matches && std::abs(effect.offset - (1.0 - c)) <= tol) {
    return noiseless_lift_affine(space, effect.complement()).complement();
  }
  throw InputError("noiseless_lift: only spin-measurement effects and the unit effect can be lifted");
}

// ---------------------------------------------------------------------------
// Generic state spaces and capacity

enum class SpaceKind { ball, simplex, polytope, orbitope, composite };

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::ball: return "ball";
    case SpaceKind::simplex: return "simplex";
    case SpaceKind::polytope: return "polytope";
    case SpaceKind::orbitope: return "orbitope";
    case SpaceKind::composite: return "composite";
  }
  return "unknown";
}

/// State space given by oracles. Vectors live in the ambient (unnormalized)
/// space; normalized states satisfy unit_functional . omega = 1.
struct GenericStateSpace {
  int ambient_dim = 0;
  Vec unit_functional;
  SpaceKind kind = SpaceKind::polytope;
  std::string description;
  std::function<bool(const Vec&, double)> membership;
  std::function<bool(const Vec&, double)> effect_membership;
  /// Vertices for polytopes; a sample of pure states otherwise.
  std::vector<Vec> extreme_points;
  bool extreme_points_exact = false;
};

namespace detail {

inline GenericStateSpace polytope_space(std::vector<Vec> vertices, Vec unit, SpaceKind kind,
                                        std::string description) {
  GenericStateSpace s;
  s.ambient_dim = static_cast<int>(unit.size());
  s.unit_functional = unit;
  s.kind = kind;
  s.description = std::move(description);
  s.extreme_points = vertices;
  s.extreme_points_exact = true;
  // Membership: convex combination of the vertices (feasibility LP).
  s.membership = [vertices, unit](const Vec& w, double tol) {
    if (std::abs(unit.dot(w) - 1.0) > tol) return false;
    const int n = static_cast<int>(w.size());
    const int k = static_cast<int>(vertices.size());
    Mat a(n, k + 2 * n);
    for (int j = 0; j < k; ++j) a.col(j) = vertices[j];
    a.block(0, k, n, n) = Mat::Identity(n, n);
    a.block(0, k + n, n, n) = -Mat::Identity(n, n);
    Vec c = Vec::Zero(k + 2 * n);
    c.tail(2 * n).setOnes();
    const LpResult r = solve_lp(c, a, w);
    return r.status == LpStatus::optimal && r.objective <= tol;
  };
  s.effect_membership = [vertices](const Vec& e, double tol) {
    for (const Vec& v : vertices) {
      const double value = e.dot(v);
      if (value < -tol || value > 1.0 + tol) return false;
    }
    return true;
  };
  return s;
}

}  // namespace detail

/// Classical n-level system: the probability simplex with n vertices.
inline GenericStateSpace simplex_state_space(int n) {
  require(n >= 1, "simplex_state_space: n must be >= 1");
  std::vector<Vec> vertices;
  for (int i = 0; i < n; ++i) vertices.push_back(unit_vector(n, i));
  return detail::polytope_space(std::move(vertices), Vec::Ones(n), SpaceKind::simplex,
                                "classical " + std::to_string(n) + "-level system");
}

/// Regular polygon with k vertices on the unit circle, as vectors (1, x, y).
inline GenericStateSpace polygon_state_space(int k) {
  require(k >= 3, "polygon_state_space: need at least 3 vertices");
  std::vector<Vec> vertices;
  for (int i = 0; i < k; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / k;
    Vec v(3);
    v << 1.0, std::cos(phi), std::sin(phi);
    vertices.push_back(v);
  }
  return detail::polytope_space(std::move(vertices), unit_vector(3, 0), SpaceKind::polytope,
                                std::to_string(k) + "-gon");
}

/// The square state space with vertices (1, +-1, +-1).
inline GenericStateSpace square_state_space() {
  std::vector<Vec> vertices;
  for (double x : {1.0, -1.0})
    for (double y : {1.0, -1.0}) {
      Vec v(3);
      v << 1.0, x, y;
      vertices.push_back(v);
    }
  return detail::polytope_space(std::move(vertices), unit_vector(3, 0), SpaceKind::polytope, "square");
}

/// Unit ball of dimension d with every effect allowed (noiseless direction bit).
/// Extreme points are a deterministic sample of the sphere.
inline GenericStateSpace ball_state_space(int d, int sample_count = 64, std::uint64_t seed = 1) {
  require(d >= 1, "ball_state_space: d must be >= 1");
  GenericStateSpace s;
  s.ambient_dim = d + 1;
  s.unit_functional = unit_vector(d + 1, 0);
  s.kind = SpaceKind::ball;
  s.description = std::to_string(d) + "-ball, all effects";
  s.membership = [](const Vec& w, double tol) {
    return std::abs(w(0) - 1.0) <= tol && w.tail(w.size() - 1).norm() <= 1.0 + tol;
  };
  s.effect_membership = [](const Vec& e, double tol) {
    const double r = e.tail(e.size() - 1).norm();
    return e(0) - r >= -tol && e(0) + r <= 1.0 + tol;
  };
  Rng rng = make_rng(seed);
  for (int i = 0; i < std::max(2, sample_count); ++i) {
    s.extreme_points.push_back(with_normalization(random_unit_vector(d, rng)));
  }
  if (d == 1) s.extreme_points = {with_normalization(Vec::Ones(1)), with_normalization(-Vec::Ones(1))};
  s.extreme_points_exact = d == 1;
  return s;
}

/// Noisy direction bit whose effects are the spin family plus mixtures with 0
/// and U: conv{0, U, M_x, U - M_x}. States are still the full ball.
inline GenericStateSpace restricted_ball_state_space(const BallSpace& space, int sample_count = 64,
                                                     std::uint64_t seed = 1) {
  GenericStateSpace s = ball_state_space(space.dim(), sample_count, seed);
  s.description = std::to_string(space.dim()) + "-ball, spin effects with a=" +
                  std::to_string(space.visibility()) + ", c=" + std::to_string(space.noise());
  const double c = space.noise();
  const double r = 0.5 * space.visibility();
  // By rotation symmetry, (alpha, v) is allowed iff (alpha, |v|) lies in the
  // trapezoid with corners (0,0), (1,0), (max(c,1-c), r), (min(c,1-c), r).
  s.effect_membership = [c, r](const Vec& e, double tol) {
    const double alpha = e(0);
    const double len = e.tail(e.size() - 1).norm();
    if (len > r + tol) return false;
    const double lo = std::min(c, 1.0 - c);
    const double hi = std::max(c, 1.0 - c);
    // Left edge from (0,0) to (lo, r); right edge from (1,0) to (hi, r).
    const double left = lo * len / r;
    const double right = 1.0 - (1.0 - hi) * len / r;
    return alpha >= left - tol && alpha <= right + tol;
  };
  return s;
}

struct CapacityResult {
  int value = 0;
  bool exact = false;        ///< false: value is only a lower bound
  std::string method;
  std::vector<Vec> states;   ///< witness states for the returned value
  std::vector<Vec> effects;  ///< witness effects, summing to the unit functional
};

namespace detail {

// Looks for effects e_1..e_n with e_i(omega_j) = delta_ij, sum e_i = U and
// 0 <= e_i <= 1 on the given validity points. Returns the effects if the LP is
// feasible and every effect passes the space's own membership oracle.
inline std::optional<std::vector<Vec>> distinguishing_effects(const GenericStateSpace& space,
                                                             const std::vector<Vec>& states,
                                                             const std::vector<Vec>& validity_points,
                                                             bool verify = true) {
  const int n = static_cast<int>(states.size());
  const int dim = space.ambient_dim;
  const int free_effects = n - 1;
  const int pts = static_cast<int>(validity_points.size());
  const int var_effects = 2 * dim * free_effects;  // e = e_plus - e_minus
  const int rows = n * n + 2 * n * pts;
  const int slack_count = 2 * n * pts;
  Mat a = Mat::Zero(rows, var_effects + slack_count);
  Vec b = Vec::Zero(rows);

  auto put = [&](int row, int effect, const Vec& v, double sign) {
    a.block(row, 2 * dim * effect, 1, dim) += sign * v.transpose();
    a.block(row, 2 * dim * effect + dim, 1, dim) -= sign * v.transpose();
  };

  int row = 0;
  for (int i = 0; i < free_effects; ++i)
    for (int j = 0; j < n; ++j) {
      put(row, i, states[j], 1.0);
      b(row++) = i == j ? 1.0 : 0.0;
    }
  // Last effect is U - sum_i e_i.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < free_effects; ++i) put(row, i, states[j], 1.0);
    b(row++) = space.unit_functional.dot(states[j]) - (j == n - 1 ? 1.0 : 0.0);
  }
  int slack = var_effects;
  for (int i = 0; i < n; ++i) {
    for (const Vec& p : validity_points) {
      const double up = space.unit_functional.dot(p);
      if (i < free_effects) {
        put(row, i, p, 1.0);  // e_i.p - s = 0
        a(row, slack++) = -1.0;
        b(row++) = 0.0;
        put(row, i, p, 1.0);  // e_i.p + s = U.p
        a(row, slack++) = 1.0;
        b(row++) = up;
      } else {
        for (int k = 0; k < free_effects; ++k) put(row, k, p, 1.0);  // sum e.p + s = U.p
        a(row, slack++) = 1.0;
        b(row++) = up;
        for (int k = 0; k < free_effects; ++k) put(row, k, p, 1.0);  // sum e.p - s = 0
        a(row, slack++) = -1.0;
        b(row++) = 0.0;
      }
    }
  }
  const LpResult r = find_feasible(a, b);
  if (r.status != LpStatus::optimal) return std::nullopt;
  std::vector<Vec> effects;
  Vec last = space.unit_functional;
  for (int i = 0; i < free_effects; ++i) {
    const Vec e = r.x.segment(2 * dim * i, dim) - r.x.segment(2 * dim * i + dim, dim);
    effects.push_back(e);
    last -= e;
  }
  effects.push_back(last);
  if (!verify) return effects;
  for (const Vec& e : effects)
    if (!space.effect_membership(e, 1e-7)) return std::nullopt;
  return effects;
}

// Enumerates k-subsets of {0..n-1} in lexicographic order; stops after limit.
inline std::vector<std::vector<int>> combinations(int n, int k, std::size_t limit, bool& exhausted) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  exhausted = true;
  if (k > n) return out;
  while (true) {
    if (out.size() >= limit) {
      exhausted = false;
      return out;
    }
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return out;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Largest n <= search_limit such that n states are perfectly distinguishable
/// by allowed effects summing to U. Polytopes are searched exhaustively over
/// vertex subsets; balls use the antipodal-pair analysis first.
inline CapacityResult capacity(const GenericStateSpace& space, int search_limit,
                               std::size_t max_tuples = 5000) {
  require(search_limit >= 1, "capacity: search_limit must be >= 1");
  require(!space.extreme_points.empty(), "capacity: space has no extreme points");
  CapacityResult result;
  result.value = 1;
  result.states = {space.extreme_points.front()};
  result.effects = {space.unit_functional};

  if (space.kind == SpaceKind::ball) {
    // Perfect discrimination needs an effect that is 1 on one pure state and 0
    // on another; on a ball only (1/2)(1, u) does that, and it forces the two
    // states to be antipodal. Hence the capacity is 2 if those effects are
    // allowed and 1 otherwise; a third state is never distinguishable.
    const int d = space.ambient_dim - 1;
    const Vec u = unit_vector(d, 0);
    const Vec plus = with_normalization(u);
    const Vec minus = with_normalization(-u);
    const Vec e_plus = 0.5 * plus;
    const Vec e_minus = 0.5 * minus;
    result.exact = true;
    result.method = "ball: antipodal-pair analysis";
    if (search_limit >= 2 && space.effect_membership(e_plus, kMembershipTol) &&
        space.effect_membership(e_minus, kMembershipTol)) {
      // Cross-check: the sampled LP relaxation must be feasible on the same pair.
      auto lp = detail::distinguishing_effects(space, {plus, minus}, space.extreme_points, false);
      if (!lp) throw VerificationFailure("capacity: LP failed on an analytically distinguishable pair");
      result.value = 2;
      result.states = {plus, minus};
      result.effects = {e_plus, e_minus};
    }
    return result;
  }

  result.method = space.extreme_points_exact ? "exhaustive vertex-subset LP" : "sampled vertex-subset LP";
  result.exact = space.extreme_points_exact;
  const int count = static_cast<int>(space.extreme_points.size());
  for (int n = 2; n <= search_limit; ++n) {
    bool exhausted = false;
    const auto tuples = detail::combinations(count, n, max_tuples, exhausted);
    bool found = false;
    for (const auto& tuple : tuples) {
      std::vector<Vec> states;
      for (int i : tuple) states.push_back(space.extreme_points[i]);
      if (auto effects = detail::distinguishing_effects(space, states, space.extreme_points)) {
        result.value = n;
        result.states = states;
        result.effects = *effects;
        found = true;
        break;
      }
    }
    if (!found) {
      // Distinguishable sets are closed under taking subsets, so no larger n works
      // either, but only an exhaustive search over exact vertices proves it.
      result.exact = result.exact && exhausted;
      return result;
    }
  }
  // Reached the search limit: larger n were not examined.
  result.exact = false;
  return result;
}

// ---------------------------------------------------------------------------
// Canonicalization

/// Affine map phi(s) = linear (s - center) on affine state coordinates.
struct CanonicalMap {
  Mat linear;
  Vec center;
  double max_group_defect = 0.0;   ///< max orthogonality defect of conjugated group elements
  double max_norm_deviation = 0.0; ///< max | |phi(pure)| - 1 |

  Vec apply(const Vec& s) const { return linear * (s - center); }
  /// Conjugates an affine group element (acting on (1, s)) into the new coordinates.
  Mat conjugate(const Mat& g) const {
    const int dim = static_cast<int>(linear.rows());
    const Mat lin = g.bottomRightCorner(dim, dim);
    const Vec shift = g.bottomLeftCorner(dim, 1);
    const Mat inv = linear.inverse();
    Mat out = Mat::Identity(dim + 1, dim + 1);
    out.bottomRightCorner(dim, dim) = linear * lin * inv;
    out.bottomLeftCorner(dim, 1) = linear * (lin * center + shift - center);
    return out;
  }
};

/// Maps a sampled state space with a compact group action onto a Euclidean
/// ball: finds the common fixed point mu, averages G^T G into an invariant
/// inner product X, and sets phi(s) = alpha sqrt(X) (s - mu) with alpha fixing
/// the pure-state radius to 1. Group elements are (D+1) x (D+1) matrices acting
/// on (1, s).
inline CanonicalMap canonicalize(const std::vector<Vec>& pure_samples, const std::vector<Mat>& group_samples) {
  require(!pure_samples.empty() && !group_samples.empty(), "canonicalize: empty input");
  const int dim = static_cast<int>(pure_samples.front().size());
  for (const Mat& g : group_samples) {
    require(g.rows() == dim + 1 && g.cols() == dim + 1, "canonicalize: group element has the wrong size");
    require(std::abs(g(0, 0) - 1.0) < 1e-9 && g.row(0).tail(dim).cwiseAbs().maxCoeff() < 1e-9,
            "canonicalize: group elements must preserve normalization");
  }
  // Fixed point: (A_k - I) mu = -b_k for all k, solved in least squares.
  const int k = static_cast<int>(group_samples.size());
  Mat stacked(k * dim, dim);
  Vec rhs(k * dim);
  for (int i = 0; i < k; ++i) {
    stacked.block(i * dim, 0, dim, dim) = group_samples[i].bottomRightCorner(dim, dim) - Mat::Identity(dim, dim);
    rhs.segment(i * dim, dim) = -group_samples[i].bottomLeftCorner(dim, 1);
  }
  const Vec center = stacked.completeOrthogonalDecomposition().solve(rhs);

  Mat x = Mat::Zero(dim, dim);
  for (const Mat& g : group_samples) {
    const Mat lin = g.bottomRightCorner(dim, dim);
    x += lin.transpose() * lin;
  }
  x /= static_cast<double>(k);
  Eigen::SelfAdjointEigenSolver<Mat> eig(x);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(top, 1e-300))) {
    throw DegenerateError("canonicalize: averaged Gram matrix is singular (degenerate representation)");
  }
  const Mat root = psd_sqrt(x);
  double mean_norm = 0.0;
  for (const Vec& p : pure_samples) mean_norm += (root * (p - center)).norm();
  mean_norm /= static_cast<double>(pure_samples.size());
  if (!(mean_norm > 1e-12)) throw DegenerateError("canonicalize: pure samples coincide with the center");

  CanonicalMap map;
  map.linear = root / mean_norm;
  map.center = center;
  const Mat inv = map.linear.inverse();
  for (const Mat& g : group_samples) {
    const Mat conj = map.linear * g.bottomRightCorner(dim, dim) * inv;
    map.max_group_defect = std::max(map.max_group_defect, orthogonality_defect(conj));
  }
  for (const Vec& p : pure_samples) {
    map.max_norm_deviation = std::max(map.max_norm_deviation, std::abs(map.apply(p).norm() - 1.0));
  }
  return map;
}

}  // namespace dirbit
