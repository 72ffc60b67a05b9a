#pragma once

// Inferring physical angles between measurement devices from probabilities
// alone, and recovering linear coordinates of measurement directions from
// the effects they induce.

#include "dirbit/common.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/parallel.hpp"
#include "dirbit/protocol.hpp"
#include "dirbit/random.hpp"
#include "dirbit/so_group.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dirbit {

/// Source of copies of one fixed, unknown state.
class PreparationDevice {
 public:
  PreparationDevice(BallSpace space, BallState state, std::uint64_t id)
      : space_(std::move(space)), state_(std::move(state)), id_(id) {
    check_state_dim(space_, state_);
  }

  const BallSpace& space() const { return space_; }
  std::uint64_t id() const { return id_; }
  /// Probability of the first outcome when Bob's own device points along x.
  double probability(const Vec& x) const { return spin_effect(space_, x, state_); }
  /// The prepared state. Only for oracles in tests and reports.
  const BallState& state_for_oracle() const { return state_; }

 private:
  BallSpace space_;
  BallState state_;
  std::uint64_t id_;
};

/// Measurement device pointing along a direction the estimator never sees.
class HiddenDevice {
 public:
  HiddenDevice(BallSpace space, Vec secret_direction, std::uint64_t id)
      : space_(std::move(space)), secret_(std::move(secret_direction)), id_(id) {
    require(secret_.size() == space_.dim(), "HiddenDevice: direction has the wrong dimension");
    require_unit(secret_, "HiddenDevice direction");
  }

  std::uint64_t id() const { return id_; }
  double probability(const PreparationDevice& prep) const {
    return spin_effect(space_, secret_, prep.state_for_oracle());
  }
  /// Ground truth. Only for oracles in tests and reports.
  const Vec& secret_direction_for_oracle() const { return secret_; }

 private:
  BallSpace space_;
  Vec secret_;
  std::uint64_t id_;
};

struct TomographyBudget {
  std::int64_t shots = 1000000;  ///< per probability estimate; 0 = exact probabilities
  int coarse_grid = 400;
  int refine_steps = 20;
  int averaged_steps = 10;  ///< trailing refinement steps averaged into the result
  int bootstrap = 50;       ///< parametric resamples for the error bar
  double max_condition = 1e6;  ///< Gram condition number above which the preparations count as dependent
};

namespace detail {

struct Estimate {
  double value;
  double variance;
};

inline Estimate estimate_probability(double p, std::int64_t shots, std::uint64_t seed) {
  p = std::clamp(p, 0.0, 1.0);
  if (shots == 0) return {p, 0.0};
  Rng rng = make_rng(seed);
  std::binomial_distribution<std::int64_t> binom(shots, p);
  const double n = static_cast<double>(shots);
  const double s = static_cast<double>(binom(rng));
  return {s / n, (s + 1.0) * (n - s + 1.0) / ((n + 2.0) * (n + 2.0) * n)};
}

inline std::vector<Vec> coarse_directions(int d, int count) {
  if (d == 3) return fibonacci_sphere(count);
  return default_directions(d, std::max(count, 2 * d), 0xc0a75e);
}

}  // namespace detail

struct AlignmentResult {
  double norm = 0.0;  ///< estimated |w|
  double norm_standard_error = 0.0;
  Vec direction;      ///< Bob's device direction maximizing the first-outcome probability
  std::int64_t probability_estimates = 0;
};

/// Searches Bob's device directions for the maximum of M_x(omega): coarse grid,
/// then local steps that measure at x0 +- h t_k along each tangent t_k. Since
/// M_x(omega) = c + (a/2) <x, w> for a fixed w, each step gives an unbiased
/// estimate of w; the trailing steps are averaged.
inline AlignmentResult estimate_norm_and_align(const PreparationDevice& prep, const TomographyBudget& budget,
                                               std::uint64_t seed) {
  const BallSpace& space = prep.space();
  const int d = space.dim();
  require(d >= 2, "estimate_norm_and_align: needs d >= 2");
  require(budget.shots >= 0 && budget.coarse_grid >= 1 && budget.refine_steps >= 1, "estimate_norm_and_align: invalid budget");
  const double a = space.visibility();
  const double c = space.noise();
  AlignmentResult out;
  auto measure = [&](const Vec& x, std::uint64_t stage, std::uint64_t index) {
    ++out.probability_estimates;
    return detail::estimate_probability(prep.probability(x), budget.shots, derive_seed(seed, stage, index)).value;
  };

  const std::vector<Vec> grid = detail::coarse_directions(d, budget.coarse_grid);
  std::size_t best = 0;
  double best_p = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = measure(grid[i], 0, i);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }

  Vec x0 = grid[best];
  std::vector<Vec> steps;
  const double h_start = std::numbers::pi / 3.0;
  const double h_end = std::numbers::pi / 6.0;
  for (int s = 0; s < budget.refine_steps; ++s) {
    const double h = budget.refine_steps == 1 ? h_end : h_start + (h_end - h_start) * s / (budget.refine_steps - 1.0);
    const Mat tangent = complement_basis(x0);
    Vec w = Vec::Zero(d);
    double along = 0.0;
    for (int k = 0; k < d - 1; ++k) {
      const std::uint64_t key = static_cast<std::uint64_t>(s) * 2 * d + 2 * k;
      const double plus = measure(std::cos(h) * x0 + std::sin(h) * tangent.col(k), 1, key);
      const double minus = measure(std::cos(h) * x0 - std::sin(h) * tangent.col(k), 1, key + 1);
      w += (plus - minus) / (a * std::sin(h)) * tangent.col(k);
      along += (plus + minus - 2.0 * c) / (a * std::cos(h));
    }
    w += along / (d - 1) * x0;
    steps.push_back(w);
    if (w.norm() > 0.0) x0 = w.normalized();
  }

  const int k = std::clamp(budget.averaged_steps, 1, budget.refine_steps);
  Vec mean = Vec::Zero(d);
  for (int i = budget.refine_steps - k; i < budget.refine_steps; ++i) mean += steps[i];
  mean /= k;
  out.norm = mean.norm();
  out.direction = out.norm > 0.0 ? Vec(mean / out.norm) : x0;
  if (k > 1 && out.norm > 0.0) {
    double spread = 0.0;
    for (int i = budget.refine_steps - k; i < budget.refine_steps; ++i) {
      const double dev = (steps[i] - mean).dot(out.direction);
      spread += dev * dev;
    }
    out.norm_standard_error = std::sqrt(spread / (k - 1.0) / k);
  }
  if (!(out.norm > std::max(5.0 * out.norm_standard_error, 1e-12))) {
    throw ProtocolFailure("estimate_norm_and_align: preparation too mixed to locate its maximum");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gram matrices

struct GramFactor {
  Mat factor;                    ///< S with S^T S = clipped X
  Mat clipped;                   ///< nearest PSD matrix to X
  double clipping_magnitude = 0.0;  ///< largest |negative eigenvalue| removed
  std::optional<std::string> warning;
};

/// Square-root factor S = diag(sqrt(lambda)) V^T of the PSD part of X.
inline GramFactor gram_factor(const Mat& x) {
  require(x.rows() == x.cols() && x.rows() >= 1, "gram_factor: matrix must be square");
  require((x - x.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()),
          "gram_factor: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (x + x.transpose()));
  const Vec lambda = eig.eigenvalues();
  GramFactor out;
  out.clipping_magnitude = std::max(0.0, -lambda.minCoeff());
  const Vec kept = lambda.cwiseMax(0.0);
  out.factor = kept.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  out.clipped = eig.eigenvectors() * kept.asDiagonal() * eig.eigenvectors().transpose();
  if (out.clipping_magnitude > 0.0) {
    out.warning = "gram_factor: clipped negative eigenvalue of magnitude " + std::to_string(out.clipping_magnitude);
  }
  return out;
}

struct GramEstimate {
  Mat x;                ///< estimated <w_i, w_j>
  Mat standard_errors;  ///< per entry
};

struct AngleEstimate {
  double angle = 0.0;      ///< radians
  double error_bar = 0.0;  ///< bootstrap standard deviation, radians
  GramEstimate gram;
  double gram_condition_number = 0.0;
  Vec coordinates_y;  ///< hat-w_y in the frame defined by S
  Vec coordinates_z;
  std::int64_t shots_used = 0;
  int attempts = 1;  ///< preparation sets tried, see protocol_c1_repeated
  std::vector<std::string> warnings;
};

namespace detail {

struct C1Measurements {
  Vec norms, norm_se;
  Mat cross, cross_var;  // cross(i, j): probability of device aligned to i on prep j
  Vec hy, hy_var, hz, hz_var;
};

// Angle from raw probability estimates; throws ProtocolFailure when the
// preparations are too close to dependent.
inline double c1_angle(const C1Measurements& m, double a, double c, double max_condition, GramEstimate* gram,
                       double* condition,
                       Vec* vy, Vec* vz, std::vector<std::string>* warnings) {
  const int d = static_cast<int>(m.norms.size());
  Mat x(d, d);
  for (int i = 0; i < d; ++i) {
    const double ri = std::clamp(m.norms(i), 0.0, 1.0);
    x(i, i) = ri * ri;
    for (int j = i + 1; j < d; ++j) {
      const double rj = std::clamp(m.norms(j), 0.0, 1.0);
      const double ij = ri * 2.0 * (m.cross(i, j) - c) / a;
      const double ji = rj * 2.0 * (m.cross(j, i) - c) / a;
      x(i, j) = x(j, i) = 0.5 * (ij + ji);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(x);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (condition) *condition = cond;
  if (!(cond <= max_condition)) {
    throw ProtocolFailure("protocol_c1: preparations are nearly linearly dependent (Gram condition number " +
                          std::to_string(cond) + "); repeat with new preparations");
  }
  const GramFactor f = gram_factor(x);
  if (warnings && f.warning) warnings->push_back(*f.warning);
  const Eigen::PartialPivLU<Mat> st(f.factor.transpose());
  const Vec y = st.solve(Vec(2.0 * (m.hy.array() - c) / a));
  const Vec z = st.solve(Vec(2.0 * (m.hz.array() - c) / a));
  if (gram) gram->x = x;
  if (vy) *vy = y;
  if (vz) *vz = z;
  if (!(y.norm() > 0.0 && z.norm() > 0.0)) throw ProtocolFailure("protocol_c1: device response vanishes");
  return angle_between(y, z);
}

}  // namespace detail

/// Estimates the angle between the hidden directions of two devices from
/// probabilities measured on d unknown preparations. All randomness is keyed
/// by device ids, so reordering the preparations does not change the result.
inline AngleEstimate protocol_c1(const HiddenDevice& device_y, const HiddenDevice& device_z,
                                 const std::vector<PreparationDevice>& preps, const TomographyBudget& budget,
                                 std::uint64_t seed) {
  require(!preps.empty(), "protocol_c1: no preparations");
  const BallSpace& space = preps.front().space();
  const int d = space.dim();
  require(d >= 2, "protocol_c1: needs d >= 2");
  require(static_cast<int>(preps.size()) == d, "protocol_c1: exactly d preparations are required");
  std::set<std::uint64_t> ids;
  for (const PreparationDevice& p : preps) {
    require(p.space().dim() == d && p.space().visibility() == space.visibility() && p.space().noise() == space.noise(),
            "protocol_c1: preparations live in different spaces");
    require(ids.insert(p.id()).second, "protocol_c1: preparation ids must be distinct");
  }
  const double a = space.visibility();
  const double c = space.noise();
  constexpr std::uint64_t kAlign = 0xa11, kCross = 0xc1, kDevice = 0xde, kBoot = 0xb0;

  std::vector<AlignmentResult> align(d);
  parallel_for(d, [&](std::size_t i) {
    align[i] = estimate_norm_and_align(preps[i], budget, derive_seed(seed, kAlign, preps[i].id()));
  });

  detail::C1Measurements m;
  m.norms.resize(d);
  m.norm_se.resize(d);
  m.cross = Mat::Zero(d, d);
  m.cross_var = Mat::Zero(d, d);
  m.hy.resize(d);
  m.hy_var.resize(d);
  m.hz.resize(d);
  m.hz_var.resize(d);
  std::int64_t estimates = 0;
  for (int i = 0; i < d; ++i) {
    m.norms(i) = align[i].norm;
    m.norm_se(i) = align[i].norm_standard_error;
    estimates += align[i].probability_estimates;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const auto e = detail::estimate_probability(preps[j].probability(align[i].direction), budget.shots,
                                                  derive_seed(seed, kCross, derive_seed(preps[i].id(), preps[j].id())));
      m.cross(i, j) = e.value;
      m.cross_var(i, j) = e.variance;
      ++estimates;
    }
    const auto ey = detail::estimate_probability(device_y.probability(preps[i]), budget.shots,
                                                 derive_seed(seed, kDevice, derive_seed(device_y.id(), preps[i].id())));
    const auto ez = detail::estimate_probability(device_z.probability(preps[i]), budget.shots,
                                                 derive_seed(seed, kDevice, derive_seed(device_z.id(), preps[i].id())));
    m.hy(i) = ey.value;
    m.hy_var(i) = ey.variance;
    m.hz(i) = ez.value;
    m.hz_var(i) = ez.variance;
    estimates += 2;
  }

  AngleEstimate out;
  out.angle = detail::c1_angle(m, a, c, budget.max_condition, &out.gram, &out.gram_condition_number, &out.coordinates_y,
                               &out.coordinates_z, &out.warnings);
  out.shots_used = estimates * budget.shots;
  out.gram.standard_errors = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    out.gram.standard_errors(i, i) = 2.0 * m.norms(i) * m.norm_se(i);
    for (int j = 0; j < d; ++j)
      if (i != j) {
        out.gram.standard_errors(i, j) =
            std::sqrt(0.25 * (m.norms(i) * m.norms(i) * m.cross_var(i, j) + m.norms(j) * m.norms(j) * m.cross_var(j, i))) *
            2.0 / a;
      }
  }

  // Parametric bootstrap: perturb every raw estimate by its standard error.
  if (budget.shots > 0 && budget.bootstrap > 1) {
    std::vector<double> angles;
    for (int b = 0; b < budget.bootstrap; ++b) {
      detail::C1Measurements pert = m;
      auto noise = [&](std::uint64_t key) {
        Rng rng = make_rng(derive_seed(seed, kBoot, derive_seed(static_cast<std::uint64_t>(b), key)));
        return std::normal_distribution<double>(0.0, 1.0)(rng);
      };
      for (int i = 0; i < d; ++i) {
        const std::uint64_t pi = preps[i].id();
        pert.norms(i) += m.norm_se(i) * noise(derive_seed(pi, 1));
        for (int j = 0; j < d; ++j)
          if (i != j) pert.cross(i, j) += std::sqrt(m.cross_var(i, j)) * noise(derive_seed(pi, preps[j].id(), 2));
        pert.hy(i) += std::sqrt(m.hy_var(i)) * noise(derive_seed(device_y.id(), pi, 3));
        pert.hz(i) += std::sqrt(m.hz_var(i)) * noise(derive_seed(device_z.id(), pi, 3));
      }
      try {
        angles.push_back(detail::c1_angle(pert, a, c, std::numeric_limits<double>::infinity(), nullptr, nullptr, nullptr, nullptr, nullptr));
      } catch (const ProtocolFailure&) {
      }
    }
    if (angles.size() > 1) {
      double mean = 0.0;
      for (double v : angles) mean += v;
      mean /= static_cast<double>(angles.size());
      double var = 0.0;
      for (double v : angles) var += (v - mean) * (v - mean);
      out.error_bar = std::sqrt(var / (angles.size() - 1.0));
    }
  }
  return out;
}

/// Runs protocol_c1 on fresh preparations until it succeeds. `draw(attempt)`
/// supplies the preparations for each attempt; ids may repeat across attempts
/// because every attempt uses its own seed.
template <class Draw>
AngleEstimate protocol_c1_repeated(const HiddenDevice& device_y, const HiddenDevice& device_z, Draw&& draw,
                                   const TomographyBudget& budget, std::uint64_t seed, int max_attempts = 20) {
  require(max_attempts >= 1, "protocol_c1_repeated: max_attempts must be positive");
  std::string last;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::vector<PreparationDevice> preps = draw(attempt);
    try {
      AngleEstimate out = protocol_c1(device_y, device_z, preps, budget, derive_seed(seed, attempt));
      out.attempts = attempt + 1;
      return out;
    } catch (const ProtocolFailure& e) {
      last = e.what();
    }
  }
  throw ProtocolFailure("protocol_c1_repeated: no success in " + std::to_string(max_attempts) + " attempts; last: " +
                        last);
}

/// d preparations with Bloch norms in [0.6, 1] along random directions.
inline std::vector<PreparationDevice> random_preparations(const BallSpace& space, std::uint64_t seed,
                                                         std::uint64_t first_id = 100) {
  Rng rng = make_rng(seed);
  std::vector<PreparationDevice> preps;
  for (int i = 0; i < space.dim(); ++i) {
    const double r = std::uniform_real_distribution<double>(0.6, 1.0)(rng);
    preps.emplace_back(space, BallState(r * random_unit_vector(space.dim(), rng)), first_id + i);
  }
  return preps;
}

/// Physical angle between two hidden devices. Only for oracles.
inline double true_angle(const HiddenDevice& y, const HiddenDevice& z) {
  return angle_between(y.secret_direction_for_oracle(), z.secret_direction_for_oracle());
}

// ---------------------------------------------------------------------------
// Coordinates from effects

/// One transformation H: label x goes to label_map[x]; states transform by
/// `state_map` ((D+1) x (D+1) on the state space of the system).
struct LabelledTransformation {
  std::vector<int> label_map;
  Mat state_map;
};

struct CoordinateReconstruction {
  Vec mu;                 ///< invariant state
  double m = 0.0;         ///< common value E_x(mu)
  bool outcomes_swapped = false;  ///< yes/no relabelled because m was 0
  Mat basis;              ///< F_1..F_d as columns
  Mat coordinates;        ///< lambda(x) as columns
  std::vector<Mat> group_matrices;  ///< Lambda L_H Lambda^-1
  double action_defect = 0.0;       ///< max |lambda(H x) - T lambda(x)|
  InvariantInnerProduct inner_product;
  Vec norms;               ///< invariant norms of lambda(x)
  double norm_spread = 0.0;  ///< (max - min) / mean
  bool norm_constant = false;
};

/// Builds linear coordinates lambda(x) for measurement labels x from effect
/// covectors E_x on a (D+1)-dimensional state space with unit functional U.
/// mu is the supplied invariant state, or the common normalized fixed point
/// of the transformations.
inline CoordinateReconstruction reconstruct_coordinates(const std::vector<Vec>& effects, const Vec& unit,
                                                        const std::vector<LabelledTransformation>& group,
                                                        std::optional<Vec> mu = std::nullopt,
                                                        double tolerance = 1e-8) {
  require(effects.size() >= 2, "reconstruct_coordinates: need at least two effects");
  const int n = static_cast<int>(effects.size());
  const int dim = static_cast<int>(unit.size());
  const int d = dim - 1;
  require(d >= 1, "reconstruct_coordinates: state space too small");
  for (const Vec& e : effects) require(e.size() == dim, "reconstruct_coordinates: effect has the wrong size");
  for (const auto& g : group) {
    require(static_cast<int>(g.label_map.size()) == n, "reconstruct_coordinates: label map has the wrong size");
    require(g.state_map.rows() == dim && g.state_map.cols() == dim, "reconstruct_coordinates: state map has the wrong size");
    for (int t : g.label_map) require(t >= 0 && t < n, "reconstruct_coordinates: label out of range");
  }

  CoordinateReconstruction out;
  if (mu) {
    require(mu->size() == dim, "reconstruct_coordinates: mu has the wrong size");
    out.mu = *mu;
  } else {
    require(!group.empty(), "reconstruct_coordinates: need transformations or mu");
    Mat stacked(static_cast<int>(group.size()) * dim + 1, dim);
    Vec rhs = Vec::Zero(stacked.rows());
    for (std::size_t k = 0; k < group.size(); ++k)
      stacked.block(static_cast<int>(k) * dim, 0, dim, dim) = group[k].state_map - Mat::Identity(dim, dim);
    stacked.row(stacked.rows() - 1) = unit.transpose();
    rhs(rhs.size() - 1) = 1.0;
    out.mu = stacked.completeOrthogonalDecomposition().solve(rhs);
  }

  std::vector<Vec> e = effects;
  double lo = e.front().dot(out.mu), hi = lo;
  for (const Vec& v : e) {
    lo = std::min(lo, v.dot(out.mu));
    hi = std::max(hi, v.dot(out.mu));
  }
  if (hi - lo > tolerance * std::max(1.0, std::abs(hi))) {
    throw InconsistentInput("reconstruct_coordinates: E_x(mu) differs across labels by " + std::to_string(hi - lo));
  }
  out.m = 0.5 * (lo + hi);
  if (std::abs(out.m) <= tolerance) {
    for (Vec& v : e) v = unit - v;
    out.m = 1.0 - out.m;
    out.outcomes_swapped = true;
  }

  Mat centered(dim, n);
  for (int i = 0; i < n; ++i) centered.col(i) = e[i] - out.m * unit;
  Eigen::ColPivHouseholderQR<Mat> qr(centered);
  qr.setThreshold(1e-10);
  if (qr.rank() < d) {
    throw DegenerateError("reconstruct_coordinates: effects do not affinely span a " + std::to_string(d) +
                          "-dimensional space (rank " + std::to_string(qr.rank()) + ")");
  }
  out.basis.resize(dim, d);
  for (int k = 0; k < d; ++k) out.basis.col(k) = centered.col(qr.colsPermutation().indices()(k));
  const auto basis_qr = out.basis.colPivHouseholderQr();
  out.coordinates = basis_qr.solve(centered);

  const Mat basis_pinv = out.basis.completeOrthogonalDecomposition().pseudoInverse();
  for (const auto& g : group) {
    const Mat t = basis_pinv * g.state_map.transpose() * out.basis;
    out.group_matrices.push_back(t);
    for (int i = 0; i < n; ++i) {
      out.action_defect = std::max(out.action_defect,
                                   (out.coordinates.col(g.label_map[i]) - t * out.coordinates.col(i)).norm());
    }
  }

  std::vector<Mat> samples = out.group_matrices;
  if (samples.empty()) samples.push_back(Mat::Identity(d, d));
  out.inner_product = invariant_inner_product(samples);
  out.norms.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec l = out.coordinates.col(i);
    out.norms(i) = std::sqrt(std::max(0.0, l.dot(out.inner_product.gram * l)));
  }
  const double mean = out.norms.mean();
  out.norm_spread = mean > 0.0 ? (out.norms.maxCoeff() - out.norms.minCoeff()) / mean : 0.0;
  out.norm_constant = out.norm_spread <= tolerance;
  return out;
}

}  // namespace dirbit
