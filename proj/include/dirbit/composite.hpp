#pragma once

// Locally tomographic composites of two ball spaces. A bipartite vector is
// stored as the (d_A + 1) x (d_B + 1) coefficient array C, flattened A-first
// (index i * (d_B + 1) + j); C(0, 0) is the normalization.

#include "dirbit/common.hpp"
#include "dirbit/framebit.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/lp.hpp"
#include "dirbit/pauli.hpp"
#include "dirbit/protocol.hpp"
#include "dirbit/random.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dirbit {

class BipartiteVector {
 public:
  BipartiteVector(int dim_a, int dim_b, Vec coefficients)
      : da_(dim_a), db_(dim_b), c_(std::move(coefficients)) {
    require(da_ >= 1 && db_ >= 1, "BipartiteVector: local dimensions must be >= 1");
    require(c_.size() == (da_ + 1) * (db_ + 1), "BipartiteVector: expected (d_A+1)(d_B+1) coefficients");
  }

  static BipartiteVector from_matrix(const Mat& c) {
    require(c.rows() >= 2 && c.cols() >= 2, "BipartiteVector: coefficient array too small");
    Vec flat(c.size());
    for (Eigen::Index i = 0; i < c.rows(); ++i) flat.segment(i * c.cols(), c.cols()) = c.row(i).transpose();
    return BipartiteVector(static_cast<int>(c.rows()) - 1, static_cast<int>(c.cols()) - 1, flat);
  }

  int dim_a() const { return da_; }
  int dim_b() const { return db_; }
  const Vec& coefficients() const { return c_; }
  double at(int i, int j) const { return c_(i * (db_ + 1) + j); }
  bool is_normalized() const { return std::abs(at(0, 0) - 1.0) <= 1e-12; }

  Mat matrix() const {
    Mat m(da_ + 1, db_ + 1);
    for (int i = 0; i <= da_; ++i) m.row(i) = c_.segment(i * (db_ + 1), db_ + 1).transpose();
    return m;
  }

 private:
  int da_;
  int db_;
  Vec c_;
};

inline BipartiteVector product(const BallState& a, const BallState& b) {
  return BipartiteVector(a.dim(), b.dim(), kron(a.full(), b.full()));
}

/// Covector of M^A (x) N^B, in the same A-first order.
inline Vec product_effect(const BallEffect& a, const BallEffect& b) { return kron(a.covector(), b.covector()); }

inline double evaluate(const Vec& covector, const BipartiteVector& w) {
  require(covector.size() == w.coefficients().size(), "evaluate: covector has the wrong length");
  return covector.dot(w.coefficients());
}

/// (1 + R_A) (x) (1 + R_B) applied to the state.
inline BipartiteVector apply_local(const BipartiteVector& w, const Mat& ra, const Mat& rb) {
  require(ra.rows() == w.dim_a() && ra.cols() == w.dim_a() && rb.rows() == w.dim_b() && rb.cols() == w.dim_b(),
          "apply_local: transformation dimensions do not match");
  Mat ga = Mat::Identity(w.dim_a() + 1, w.dim_a() + 1);
  ga.bottomRightCorner(w.dim_a(), w.dim_a()) = ra;
  Mat gb = Mat::Identity(w.dim_b() + 1, w.dim_b() + 1);
  gb.bottomRightCorner(w.dim_b(), w.dim_b()) = rb;
  return BipartiteVector::from_matrix(ga * w.matrix() * gb.transpose());
}

inline BipartiteVector swap_systems(const BipartiteVector& w) {
  return BipartiteVector::from_matrix(w.matrix().transpose());
}

/// Reduced states as full (d+1)-vectors (normalization first).
inline Vec marginal_a(const BipartiteVector& w) { return w.matrix().col(0); }
inline Vec marginal_b(const BipartiteVector& w) { return w.matrix().row(0).transpose(); }

// ---------------------------------------------------------------------------
// Observable extension

struct ExtendedObservable {
  Vec covector;  ///< h (x) U + U (x) h
  int span_rank = 0;
  int required_rank = 0;
  double max_additivity_error = 0.0;
  int samples = 0;
};

/// Extends a local observable h = (offset, vector) to pairs of systems of the
/// same dimension, and checks additivity on random product states and that
/// those product states span the composite space.
inline ExtendedObservable extend_observable(const BallEffect& h, int samples = 1000, std::uint64_t seed = 0) {
  const int d = static_cast<int>(h.vector.size());
  require(d >= 1, "extend_observable: empty observable");
  require(samples >= 1, "extend_observable: need at least one sample");
  const BallEffect unit = BallEffect::unit(d);
  ExtendedObservable out;
  out.covector = product_effect(h, unit) + product_effect(unit, h);
  out.required_rank = (d + 1) * (d + 1);
  out.samples = samples;
  Rng rng = make_rng(seed);
  Mat span(out.required_rank, samples);
  for (int k = 0; k < samples; ++k) {
    const BallState a(random_ball_point(d, rng));
    const BallState b(random_ball_point(d, rng));
    const BipartiteVector w = product(a, b);
    span.col(k) = w.coefficients();
    out.max_additivity_error = std::max(out.max_additivity_error, std::abs(evaluate(out.covector, w) - h(a) - h(b)));
  }
  Eigen::FullPivLU<Mat> lu(span);
  lu.setThreshold(1e-9);
  out.span_rank = static_cast<int>(lu.rank());
  if (out.span_rank < out.required_rank) {
    throw LocalTomographyViolation("extend_observable: product states span only " + std::to_string(out.span_rank) +
                                   " of " + std::to_string(out.required_rank) + " dimensions");
  }
  if (out.max_additivity_error > 1e-12 * std::max(1.0, h.vector.norm() + std::abs(h.offset))) {
    throw VerificationFailure("extend_observable: extension is not additive on product states");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conditional states

struct ConditionalState {
  Vec bloch;                 ///< may lie outside the ball; see in_ball
  double probability = 0.0;  ///< (U^A (x) N^B)(omega)
  double ball_margin = 0.0;  ///< 1 - |bloch|
  bool in_ball = false;
};

/// State of A after B's effect N^B clicked.
inline ConditionalState conditional_state(const BipartiteVector& w, const BallEffect& nb) {
  require(nb.vector.size() == w.dim_b(), "conditional_state: effect dimension does not match B");
  const Vec v = w.matrix() * nb.covector();
  ConditionalState out;
  out.probability = v(0);
  if (!(v(0) > 1e-12)) {
    throw UndefinedConditional("conditional_state: conditioning outcome has probability " + std::to_string(v(0)));
  }
  out.bloch = v.tail(w.dim_a()) / v(0);
  out.ball_margin = 1.0 - out.bloch.norm();
  out.in_ball = out.ball_margin >= -kMembershipTol;
  return out;
}

// ---------------------------------------------------------------------------
// Membership in Omega_min, Omega_max, and the two-qubit regime

enum class Regime { min, max, quantum_d3 };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::min: return "min";
    case Regime::max: return "max";
    case Regime::quantum_d3: return "quantum-d3";
  }
  return "unknown";
}

/// Which local effects enter the product-effect constraints. `ball_dual`
/// takes every effect valid on the ball; `spin` only the space's spin effects,
/// their complements, and the unit.
enum class LocalEffects { ball_dual, spin };

struct CompositeSpace {
  BallSpace a;
  BallSpace b;
  Regime regime = Regime::max;
  LocalEffects effects = LocalEffects::ball_dual;

  static CompositeSpace noiseless(int da, int db, Regime regime) {
    return {BallSpace::noiseless(da), BallSpace::noiseless(db), regime, LocalEffects::ball_dual};
  }
  static CompositeSpace quantum() { return noiseless(3, 3, Regime::quantum_d3); }
};

struct MembershipOptions {
  int grid = 2000;            ///< sphere points per optimization (max regime)
  int refine_starts = 8;      ///< best grid points refined locally
  double refine_tol = 1e-10;  ///< final step of the pattern search
  int max_refine_iterations = 20000;
  int pool = 10000;           ///< random pure product states (min regime, d > 1)
  std::uint64_t seed = 0;
};

struct MembershipWitness {
  std::string kind;  ///< "product-effect", "conditional-on-a", "conditional-on-b", "hull-distance", "eigenvalue"
  Vec a_direction;
  Vec b_direction;
  double value = 0.0;
};

struct MembershipReport {
  Regime regime = Regime::max;
  double margin = 0.0;  ///< negative means a violation was found
  bool member = false;
  bool inconclusive = false;
  std::optional<MembershipWitness> witness;  ///< the minimizing constraint
  int grid_resolution = 0;
  int refinement_depth = 0;
  int pool_size = 0;
};

namespace detail {

struct EffectFamily {
  double offset;  ///< effects offset + radius <u, .>, u on the unit sphere
  double radius;
};

inline std::vector<EffectFamily> effect_families(const BallSpace& s, LocalEffects e) {
  if (e == LocalEffects::ball_dual) return {{1.0, 1.0}};
  const double c = s.noise();
  const double r = 0.5 * s.visibility();
  if (std::abs(c - 0.5) <= 1e-15) return {{c, r}};
  return {{c, r}, {1.0 - c, r}};
}

struct SphereMin {
  double value;
  Vec point;
  int depth = 0;
  bool converged = true;
};

// Minimizes f over the unit sphere in R^d: a fixed grid, then a pattern
// search along tangent directions from the best few grid points.
template <class F>
SphereMin minimize_on_sphere(int d, const F& f, const MembershipOptions& opt, std::uint64_t seed) {
  std::vector<Vec> grid;
  if (d == 1) {
    grid = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    grid = default_directions(d, std::max(opt.grid, d + 1), seed);
  }
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(grid.size());
  for (int k = 0; k < static_cast<int>(grid.size()); ++k) ranked.emplace_back(f(grid[k]), k);
  std::sort(ranked.begin(), ranked.end());
  SphereMin best{ranked.front().first, grid[ranked.front().second]};
  if (d == 1) return best;
  const int starts = std::min<int>(opt.refine_starts, static_cast<int>(ranked.size()));
  const double spacing = std::min(0.5, 4.0 * std::pow(static_cast<double>(grid.size()), -1.0 / (d - 1)));
  int max_depth = 0;
  bool all_converged = true;
  for (int s = 0; s < starts; ++s) {
    Vec w = grid[ranked[s].second];
    double fw = ranked[s].first;
    double h = spacing;
    int depth = 0;
    int iterations = 0;
    bool converged = true;
    while (h > opt.refine_tol) {
      if (++iterations > opt.max_refine_iterations) {
        converged = false;
        break;
      }
      const Mat tangent = complement_basis(w);
      bool moved = false;
      for (int k = 0; k < d - 1 && !moved; ++k) {
        for (double sign : {1.0, -1.0}) {
          const Vec trial = (w + sign * h * tangent.col(k)).normalized();
          const double ft = f(trial);
          if (ft < fw) {
            w = trial;
            fw = ft;
            moved = true;
            break;
          }
        }
      }
      if (!moved) {
        h *= 0.5;
        ++depth;
      }
    }
    max_depth = std::max(max_depth, depth);
    all_converged = all_converged && converged;
    if (fw < best.value) {
      best.value = fw;
      best.point = w;
    }
  }
  best.depth = max_depth;
  best.converged = all_converged;
  return best;
}

// min over u of offset * v0 + radius * <u, v_rest>, with the minimizer.
inline double closed_form_min(const EffectFamily& fam, const Vec& v, Vec* argmin) {
  const Vec rest = v.tail(v.size() - 1);
  const double n = rest.norm();
  if (argmin) *argmin = n > 0.0 ? Vec(-rest / n) : unit_vector(static_cast<int>(rest.size()), 0);
  return fam.offset * v(0) - fam.radius * n;
}

inline MembershipReport max_membership(const CompositeSpace& space, const BipartiteVector& w,
                                       const MembershipOptions& opt) {
  MembershipReport out;
  out.regime = Regime::max;
  out.grid_resolution = opt.grid;
  out.margin = std::numeric_limits<double>::infinity();
  const Mat c = w.matrix();
  const std::vector<EffectFamily> fa = effect_families(space.a, space.effects);
  const std::vector<EffectFamily> fb = effect_families(space.b, space.effects);
  const EffectFamily state_test{1.0, 1.0};
  int index = 0;
  // optimize_b: the sphere search runs over B's direction, the A side in closed form.
  auto run = [&](const EffectFamily& closed, const EffectFamily& searched, bool optimize_b, const std::string& kind) {
    const Mat& m = optimize_b ? c : Mat(c.transpose());
    const int d = optimize_b ? w.dim_b() : w.dim_a();
    auto f = [&](const Vec& dir) {
      Vec g(d + 1);
      g(0) = searched.offset;
      g.tail(d) = searched.radius * dir;
      return closed_form_min(closed, m * g, nullptr);
    };
    const SphereMin r = minimize_on_sphere(d, f, opt, derive_seed(opt.seed, static_cast<std::uint64_t>(index++)));
    out.refinement_depth = std::max(out.refinement_depth, r.depth);
    if (!r.converged) out.inconclusive = true;
    if (r.value < out.margin) {
      Vec g(d + 1);
      g(0) = searched.offset;
      g.tail(d) = searched.radius * r.point;
      Vec other;
      closed_form_min(closed, m * g, &other);
      out.margin = r.value;
      out.witness = MembershipWitness{kind, optimize_b ? other : r.point, optimize_b ? r.point : other, r.value};
    }
  };
  for (const EffectFamily& a : fa)
    for (const EffectFamily& b : fb) run(a, b, true, "product-effect");
  if (space.effects != LocalEffects::ball_dual) {
    for (const EffectFamily& b : fb) run(state_test, b, true, "conditional-on-b");
    for (const EffectFamily& a : fa) run(state_test, a, false, "conditional-on-a");
  }
  out.member = out.margin >= -kMembershipTol;
  return out;
}

inline std::vector<Vec> signed_directions(const Mat& columns, const Vec& extra) {
  std::vector<Vec> out;
  for (Eigen::Index k = 0; k < columns.cols(); ++k) {
    out.push_back(columns.col(k));
    out.push_back(-columns.col(k));
  }
  if (extra.norm() > 1e-12) {
    out.push_back(extra.normalized());
    out.push_back(-extra.normalized());
  }
  return out;
}

inline MembershipReport min_membership(const BipartiteVector& w, const MembershipOptions& opt) {
  MembershipReport out;
  out.regime = Regime::min;
  const int da = w.dim_a();
  const int db = w.dim_b();
  const Mat c = w.matrix();
  std::vector<std::pair<Vec, Vec>> pool;
  // Pure product states built from the state's own correlation structure, so
  // products and their mixtures along shared axes are reached exactly.
  Eigen::JacobiSVD<Mat> svd(c.bottomRightCorner(da, db), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const std::vector<Vec> sa = signed_directions(svd.matrixU(), c.col(0).tail(da));
  const std::vector<Vec> sb = signed_directions(svd.matrixV(), c.row(0).tail(db).transpose());
  for (const Vec& x : sa)
    for (const Vec& y : sb) pool.emplace_back(x, y);
  if (da > 1 || db > 1) {
    Rng rng = make_rng(opt.seed);
    for (int k = 0; k < opt.pool; ++k) {
      Vec x = random_unit_vector(da, rng);
      Vec y = random_unit_vector(db, rng);
      pool.emplace_back(std::move(x), std::move(y));
    }
  }
  const int m = (da + 1) * (db + 1);
  const int n = static_cast<int>(pool.size());
  Mat a(m, n + 2 * m);
  for (int k = 0; k < n; ++k) a.col(k) = kron(with_normalization(pool[k].first), with_normalization(pool[k].second));
  a.middleCols(n, m) = Mat::Identity(m, m);
  a.rightCols(m) = -Mat::Identity(m, m);
  Vec cost = Vec::Zero(n + 2 * m);
  cost.tail(2 * m).setOnes();
  const LpResult lp = solve_lp(cost, a, w.coefficients());
  out.pool_size = n;
  if (lp.status != LpStatus::optimal) {
    out.inconclusive = true;
    out.margin = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double distance = lp.objective;
  out.margin = distance <= 1e-9 ? 0.0 : -distance;
  out.member = distance <= 1e-9;
  if (!out.member) {
    // Largest residual coordinate, reported as the (i, j) index pair.
    const Vec resid = w.coefficients() - a.leftCols(n) * lp.x.head(n);
    Eigen::Index at = 0;
    resid.cwiseAbs().maxCoeff(&at);
    MembershipWitness wit;
    wit.kind = "hull-distance";
    wit.a_direction = Vec::Constant(1, static_cast<double>(at / (db + 1)));
    wit.b_direction = Vec::Constant(1, static_cast<double>(at % (db + 1)));
    wit.value = distance;
    out.witness = wit;
  }
  return out;
}

}  // namespace detail

inline MembershipReport omega_membership(const CompositeSpace& space, const BipartiteVector& w,
                                         const MembershipOptions& opt = {}) {
  require(w.dim_a() == space.a.dim() && w.dim_b() == space.b.dim(), "omega_membership: dimensions do not match");
  require(w.is_normalized(), "omega_membership: state is not normalized");
  switch (space.regime) {
    case Regime::max: return detail::max_membership(space, w, opt);
    case Regime::min: return detail::min_membership(w, opt);
    case Regime::quantum_d3: {
      require(w.dim_a() == 3 && w.dim_b() == 3, "omega_membership: the two-qubit regime needs d = 3 on both sides");
      const CMat rho = density_from_coefficients(w.matrix());
      const Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (rho + rho.adjoint()));
      MembershipReport out;
      out.regime = Regime::quantum_d3;
      out.margin = eig.eigenvalues().minCoeff();
      out.member = out.margin >= -kMembershipTol;
      if (!out.member) out.witness = MembershipWitness{"eigenvalue", Vec(), Vec(), out.margin};
      return out;
    }
  }
  return {};
}

/// Two-qubit density matrix as a bipartite vector of two noiseless d = 3 balls.
inline BipartiteVector from_density(const CMat& rho) {
  require_density(rho, "from_density");
  return BipartiteVector::from_matrix(pauli_coefficients(rho));
}

inline CMat to_density(const BipartiteVector& w) {
  require(w.dim_a() == 3 && w.dim_b() == 3, "to_density: needs d = 3 on both sides");
  return density_from_coefficients(w.matrix());
}

/// (|01> - |10>)/sqrt(2): correlation array diag(1, -1, -1, -1).
inline BipartiteVector singlet() {
  Mat c = Mat::Zero(4, 4);
  c.diagonal() << 1.0, -1.0, -1.0, -1.0;
  return BipartiteVector::from_matrix(c);
}

// ---------------------------------------------------------------------------
// Two classical bits: the d = 1 tetrahedron

struct TetrahedronReport {
  std::vector<std::array<Rational, 4>> vertices;  ///< C(0,0), C(0,1), C(1,0), C(1,1)
  int dimension = 0;
  int composite_dimension = 0;  ///< (d_A + 1)(d_B + 1) - 1
  bool vertices_are_pure_products = false;
};

namespace detail {

inline Rational det3(const std::array<std::array<Rational, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// Enumerates the vertices of the two-noiseless-1-ball Omega_max exactly and
/// checks them against the four pure product states.
inline TetrahedronReport tetrahedron_d1() {
  // Constraint (1, s) C (1, t)^T >= 0 with C(0,0) = 1, over x = (C01, C10, C11):
  // t x0 + s x1 + s t x2 >= -1.
  std::vector<std::array<Rational, 3>> rows;
  for (int s : {1, -1})
    for (int t : {1, -1}) rows.push_back({Rational(t), Rational(s), Rational(s * t)});
  const int nrows = static_cast<int>(rows.size());
  TetrahedronReport out;
  std::set<std::array<Rational, 4>> found;
  for (int skip = 0; skip < nrows; ++skip) {
    std::array<std::array<Rational, 3>, 3> m;
    int r = 0;
    for (int k = 0; k < nrows; ++k)
      if (k != skip) m[r++] = rows[k];
    const Rational det = detail::det3(m);
    if (det == Rational(0)) continue;
    std::array<Rational, 3> x;
    for (int col = 0; col < 3; ++col) {
      auto mc = m;
      for (int i = 0; i < 3; ++i) mc[i][col] = Rational(-1);
      x[col] = detail::det3(mc) / det;
    }
    const auto& extra = rows[skip];
    if (extra[0] * x[0] + extra[1] * x[1] + extra[2] * x[2] >= Rational(-1)) {
      found.insert({Rational(1), x[0], x[1], x[2]});
    }
  }
  out.vertices.assign(found.begin(), found.end());
  const std::set<std::array<Rational, 4>> listed = {
      {Rational(1), Rational(1), Rational(1), Rational(1)},
      {Rational(1), Rational(-1), Rational(1), Rational(-1)},
      {Rational(1), Rational(1), Rational(-1), Rational(-1)},
      {Rational(1), Rational(-1), Rational(-1), Rational(1)},
  };
  if (found != listed) throw VerificationFailure("tetrahedron_d1: vertices differ from the four pure products");
  Mat diffs(3, static_cast<int>(out.vertices.size()) - 1);
  for (int k = 1; k < static_cast<int>(out.vertices.size()); ++k)
    for (int i = 0; i < 3; ++i) diffs(i, k - 1) = to_double(out.vertices[k][i + 1] - out.vertices[0][i + 1]);
  out.dimension = static_cast<int>(Eigen::FullPivLU<Mat>(diffs).rank());
  out.composite_dimension = (1 + 1) * (1 + 1) - 1;
  if (out.dimension != out.composite_dimension) throw VerificationFailure("tetrahedron_d1: polytope is not full-dimensional");
  // Each vertex is (1, s) (x) (1, t) with s, t = +-1: Omega_max equals Omega_min.
  out.vertices_are_pure_products = true;
  for (const auto& v : out.vertices) {
    const bool pure = boost::abs(v[1]) == Rational(1) && boost::abs(v[2]) == Rational(1) && v[3] == v[1] * v[2];
    out.vertices_are_pure_products = out.vertices_are_pure_products && pure;
  }
  if (!out.vertices_are_pure_products) throw VerificationFailure("tetrahedron_d1: a vertex is not a product state");
  return out;
}

// ---------------------------------------------------------------------------
// CHSH

/// p(a, b | x, y) for binary settings and outcomes.
struct Behavior {
  std::array<double, 16> p{};
  double& at(int x, int y, int a, int b) { return p[((x * 2 + y) * 2 + a) * 2 + b]; }
  double at(int x, int y, int a, int b) const { return p[((x * 2 + y) * 2 + a) * 2 + b]; }
  double correlator(int x, int y) const {
    return at(x, y, 0, 0) + at(x, y, 1, 1) - at(x, y, 0, 1) - at(x, y, 1, 0);
  }
};

inline double signalling_defect(const Behavior& q) {
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int x = 0; x < 2; ++x)
      worst = std::max(worst, std::abs((q.at(x, 0, a, 0) + q.at(x, 0, a, 1)) - (q.at(x, 1, a, 0) + q.at(x, 1, a, 1))));
  for (int b = 0; b < 2; ++b)
    for (int y = 0; y < 2; ++y)
      worst = std::max(worst, std::abs((q.at(0, y, 0, b) + q.at(0, y, 1, b)) - (q.at(1, y, 0, b) + q.at(1, y, 1, b))));
  return worst;
}

/// E00 + E01 + E10 - E11.
inline double chsh_value(const Behavior& q) {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double total = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          require(q.at(x, y, a, b) >= -1e-9, "chsh_value: negative probability");
          total += q.at(x, y, a, b);
        }
      require(std::abs(total - 1.0) <= 1e-9, "chsh_value: probabilities do not sum to 1");
    }
  require(signalling_defect(q) <= 1e-9, "chsh_value: behavior is signalling");
  return q.correlator(0, 0) + q.correlator(0, 1) + q.correlator(1, 0) - q.correlator(1, 1);
}

/// Outcome a = f_x, b = g_y with fixed bits.
inline Behavior deterministic_behavior(int a0, int a1, int b0, int b1) {
  Behavior q;
  const int a[2] = {a0, a1};
  const int b[2] = {b0, b1};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) q.at(x, y, a[x], b[y]) = 1.0;
  return q;
}

/// Best CHSH value over the 16 deterministic local strategies.
inline double max_deterministic_chsh() {
  double best = -4.0;
  for (int bits = 0; bits < 16; ++bits)
    best = std::max(best, chsh_value(deterministic_behavior(bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1)));
  return best;
}

/// a XOR b = x AND y, uniform marginals.
inline Behavior pr_box() {
  Behavior q;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) q.at(x, y, a, b) = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
  return q;
}

/// Behavior of a bipartite state under spin measurements along the given
/// physical directions; outcome 0 is the spin effect, 1 its complement.
inline Behavior behavior_from_state(const CompositeSpace& space, const BipartiteVector& w,
                                    const std::array<Vec, 2>& a_settings, const std::array<Vec, 2>& b_settings) {
  require(w.dim_a() == space.a.dim() && w.dim_b() == space.b.dim(), "behavior_from_state: dimensions do not match");
  Behavior q;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const BallEffect ea = spin_effect_functional(space.a, a_settings[x]);
      const BallEffect eb = spin_effect_functional(space.b, b_settings[y]);
      const BallEffect ma[2] = {ea, ea.complement()};
      const BallEffect mb[2] = {eb, eb.complement()};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) q.at(x, y, a, b) = evaluate(product_effect(ma[a], mb[b]), w);
    }
  return q;
}

}  // namespace dirbit
