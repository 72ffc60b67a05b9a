#pragma once

// Direction transmission between two parties without a shared frame: shot
// simulation, two independent decoders, codeword standardization, the twisted
// d = 2 scheme, and the equivariance check.

#include "dirbit/common.hpp"
#include "dirbit/gpt_core.hpp"
#include "dirbit/parallel.hpp"
#include "dirbit/random.hpp"
#include "dirbit/so_group.hpp"

#include <cstdint>
#include <functional>
#include <tuple>
#include <utility>
#include <vector>

namespace dirbit {

struct ShotRecord {
  Vec direction;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
};

/// A probability estimate with its variance; variance 0 means exact.
struct ProbabilityRecord {
  Vec direction;
  double probability = 0.0;
  double variance = 0.0;
};

// ---------------------------------------------------------------------------
// Direction sets

/// Fibonacci lattice on S^2.
inline std::vector<Vec> fibonacci_sphere(int count) {
  require(count >= 1, "fibonacci_sphere: count must be >= 1");
  std::vector<Vec> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec v(3);
    v << r * std::cos(golden * i), r * std::sin(golden * i), z;
    out.push_back(v);
  }
  return out;
}

/// Deterministic measurement directions spanning R^d: +-1 for d = 1, equally
/// spaced angles for d = 2, a Fibonacci sphere for d = 3, and the orthoplex
/// vertices followed by seeded random directions for d >= 4.
inline std::vector<Vec> default_directions(int d, int count, std::uint64_t seed = 0) {
  require(d >= 1, "default_directions: d must be >= 1");
  require(count >= d + 1 || (d == 1 && count >= 2), "default_directions: too few directions to span");
  std::vector<Vec> out;
  if (d == 1) {
    for (int i = 0; i < count; ++i) out.push_back(Vec::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
  } else if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / count;
      Vec v(2);
      v << std::cos(phi), std::sin(phi);
      out.push_back(v);
    }
  } else if (d == 3) {
    out = fibonacci_sphere(count);
  } else {
    for (int i = 0; i < d && static_cast<int>(out.size()) < count; ++i) {
      out.push_back(unit_vector(d, i));
      if (static_cast<int>(out.size()) < count) out.push_back(-unit_vector(d, i));
    }
    Rng rng = make_rng(seed);
    while (static_cast<int>(out.size()) < count) out.push_back(random_unit_vector(d, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shot simulation

inline std::vector<ShotRecord> simulate_shots(const BallSpace& space, const BallState& state,
                                              const std::vector<Vec>& directions, std::int64_t shots_per_direction,
                                              std::uint64_t seed) {
  check_state_dim(space, state);
  require(shots_per_direction >= 1, "simulate_shots: shots_per_direction must be >= 1");
  std::vector<ShotRecord> out(directions.size());
  parallel_for(directions.size(), [&](std::size_t i) {
    const double p = std::clamp(spin_effect(space, directions[i], state), 0.0, 1.0);
    Rng rng = make_rng(derive_seed(seed, i));
    std::binomial_distribution<std::int64_t> binom(shots_per_direction, p);
    out[i] = {directions[i], shots_per_direction, binom(rng)};
  });
  return out;
}

/// Infinite-shot limit: exact outcome probabilities.
inline std::vector<ProbabilityRecord> exact_probabilities(const BallSpace& space, const BallState& state,
                                                          const std::vector<Vec>& directions) {
  std::vector<ProbabilityRecord> out;
  for (const Vec& y : directions) out.push_back({y, spin_effect(space, y, state), 0.0});
  return out;
}

/// Frequencies with Laplace-smoothed binomial variance (s+1)(n-s+1)/((n+2)^2 n),
/// which stays positive when every shot lands on one outcome.
inline std::vector<ProbabilityRecord> to_probabilities(const std::vector<ShotRecord>& records) {
  std::vector<ProbabilityRecord> out;
  for (const ShotRecord& r : records) {
    require(r.trials >= 1 && r.successes >= 0 && r.successes <= r.trials, "shot record has invalid counts");
    const double n = static_cast<double>(r.trials);
    const double s = static_cast<double>(r.successes);
    out.push_back({r.direction, s / n, (s + 1.0) * (n - s + 1.0) / ((n + 2.0) * (n + 2.0) * n)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

struct DecodeResult {
  Vec estimate;                 ///< unit physical direction
  Vec bloch_estimate;           ///< fitted Bloch vector
  Mat bloch_covariance;
  double bloch_norm = 0.0;
  double norm_standard_error = 0.0;
  double angular_standard_error = 0.0;  ///< radians
  std::int64_t shots_used = 0;          ///< 0 for exact probabilities
  bool angular_error_available = false;
  // Secondary decoder: argmax of an interpolated L over a direction grid.
  Vec secondary_estimate;
  double secondary_angular_standard_error = 0.0;
  double decoder_discrepancy = 0.0;  ///< angle between the two estimates, radians
  bool consistent = false;
};

namespace detail {

inline bool direction_less(const ProbabilityRecord& a, const ProbabilityRecord& b) {
  for (Eigen::Index i = 0; i < a.direction.size(); ++i)
    if (a.direction(i) != b.direction(i)) return a.direction(i) < b.direction(i);
  return std::tie(a.probability, a.variance) < std::tie(b.probability, b.variance);
}

// Least-squares fit of theta in p = offset + A theta with heteroscedastic
// sandwich covariance (A^T A)^-1 A^T Sigma A (A^T A)^-1.
struct LinearFit {
  Vec theta;
  Mat covariance;
};

inline LinearFit least_squares(const Mat& a, const Vec& rhs, const Vec& variances) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-10 * sv(0))) {
    throw InputError("decode: measurement directions do not span the space");
  }
  LinearFit fit;
  fit.theta = svd.solve(rhs);
  const Mat pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  fit.covariance = pinv * variances.asDiagonal() * pinv.transpose();
  return fit;
}

inline double tangent_error(const Mat& cov, const Vec& v) {
  const double n = v.norm();
  if (v.size() < 2 || n == 0.0) return 0.0;
  const Vec u = v / n;
  const Mat p = Mat::Identity(v.size(), v.size()) - u * u.transpose();
  return std::sqrt(std::max(0.0, (p * cov * p).trace())) / n;
}

inline std::vector<Vec> search_grid(int d) {
  if (d == 1) return {Vec::Ones(1), -Vec::Ones(1)};
  if (d == 2) return default_directions(2, 360);
  if (d == 3) return fibonacci_sphere(400);
  return default_directions(d, std::max(2 * d, 400), 0x5eed);
}

// Derivative-free ascent of f on the unit sphere from `start`: try +-h along
// each tangent direction, halve h when nothing improves.
template <typename F>
Vec refine_on_sphere(const F& f, Vec start, double initial_step, double final_step) {
  const int d = static_cast<int>(start.size());
  if (d == 1) return start;
  Vec best = start.normalized();
  double best_value = f(best);
  for (double h = initial_step; h > final_step;) {
    bool improved = false;
    const Mat tangent = complement_basis(best);
    for (int k = 0; k < d - 1 && !improved; ++k)
      for (double sign : {1.0, -1.0}) {
        const Vec trial = (std::cos(h) * best + sign * std::sin(h) * tangent.col(k)).normalized();
        const double value = f(trial);
        if (value > best_value) {
          best = trial;
          best_value = value;
          improved = true;
          break;
        }
      }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace detail

/// Decodes a direction from probability estimates. Records are sorted into a
/// canonical order first, so the result does not depend on their order.
inline DecodeResult decode_probabilities(const BallSpace& space, std::vector<ProbabilityRecord> records,
                                         std::int64_t shots_used = 0) {
  const int d = space.dim();
  require(!records.empty(), "decode: no records");
  for (const ProbabilityRecord& r : records) {
    require(r.direction.size() == d, "decode: record direction has the wrong dimension");
    require_unit(r.direction, "decode record direction");
  }
  std::sort(records.begin(), records.end(), detail::direction_less);
  const int n = static_cast<int>(records.size());
  const double a = space.visibility();
  const double c = space.noise();

  Mat design(n, d);
  Vec rhs(n), var(n);
  for (int i = 0; i < n; ++i) {
    design.row(i) = 0.5 * a * space.bloch_direction(records[i].direction).transpose();
    rhs(i) = records[i].probability - c;
    var(i) = records[i].variance;
  }
  const detail::LinearFit primary = detail::least_squares(design, rhs, var);

  DecodeResult out;
  out.bloch_estimate = primary.theta;
  out.bloch_covariance = primary.covariance;
  out.bloch_norm = primary.theta.norm();
  out.shots_used = shots_used;
  if (out.bloch_norm > 0.0) {
    const Vec u = primary.theta / out.bloch_norm;
    out.norm_standard_error = std::sqrt(std::max(0.0, u.dot(primary.covariance * u)));
  }
  if (!(out.bloch_norm > std::max(5.0 * out.norm_standard_error, 1e-12))) {
    throw NoDirectionInformation("decode: fitted Bloch vector is indistinguishable from the maximally mixed state");
  }
  out.estimate = space.physical_direction(primary.theta).normalized();
  out.angular_error_available = d >= 2;
  out.angular_standard_error = detail::tangent_error(primary.covariance, primary.theta);

  // Secondary route: free-intercept harmonic fit p ~ beta0 + <beta, y> in
  // physical coordinates (no use of a, c or the frame), L(z) ~ 2 <beta, z>.
  Mat harmonic(n, d + 1);
  Vec raw(n);
  for (int i = 0; i < n; ++i) {
    harmonic(i, 0) = 1.0;
    harmonic.row(i).tail(d) = records[i].direction.transpose();
    raw(i) = records[i].probability;
  }
  const detail::LinearFit second = detail::least_squares(harmonic, raw, var);
  const Vec beta = second.theta.tail(d);
  const Mat beta_cov = second.covariance.bottomRightCorner(d, d);
  auto contrast = [&beta](const Vec& z) { return 2.0 * beta.dot(z); };
  const std::vector<Vec> grid = detail::search_grid(d);
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (contrast(grid[k]) > contrast(grid[best])) best = k;  // strict: lowest index wins ties
  out.secondary_estimate = detail::refine_on_sphere(contrast, grid[best], 0.05, 1e-10);
  out.secondary_angular_standard_error = detail::tangent_error(beta_cov, beta);

  out.decoder_discrepancy = angle_between(out.estimate, out.secondary_estimate);
  const double combined = std::hypot(out.angular_standard_error, out.secondary_angular_standard_error);
  out.consistent = out.decoder_discrepancy <= 3.0 * combined + 1e-6;
  return out;
}

inline DecodeResult decode(const BallSpace& space, const std::vector<ShotRecord>& records) {
  std::int64_t shots = 0;
  for (const ShotRecord& r : records) shots += r.trials;
  return decode_probabilities(space, to_probabilities(records), shots);
}

// ---------------------------------------------------------------------------
// Encodings

class EncodingScheme {
 public:
  enum class Kind { canonical, custom, twisted_2d };
  using Map = std::function<BallState(const BallSpace&, const Vec&)>;
  using AngleMap = std::function<double(double)>;

  static EncodingScheme canonical(double lambda) {
    require(lambda > 0.0 && lambda <= 1.0, "canonical encoding: lambda must lie in (0,1]");
    EncodingScheme e;
    e.kind_ = Kind::canonical;
    e.lambda_ = lambda;
    return e;
  }

  static EncodingScheme custom(Map map) {
    require(static_cast<bool>(map), "custom encoding: empty map");
    EncodingScheme e;
    e.kind_ = Kind::custom;
    e.map_ = std::move(map);
    return e;
  }

  /// omega(x) = lambda O R_{theta(lambda)} x. Only meaningful for d = 2.
  static EncodingScheme twisted_2d(int d, double lambda, AngleMap theta) {
    require(d == 2, "twisted encoding exists only for d = 2");
    require(lambda > 0.0 && lambda <= 1.0, "twisted encoding: lambda must lie in (0,1]");
    require(static_cast<bool>(theta), "twisted encoding: empty angle map");
    EncodingScheme e;
    e.kind_ = Kind::twisted_2d;
    e.lambda_ = lambda;
    e.theta_ = std::move(theta);
    return e;
  }

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const AngleMap& angle_map() const { return theta_; }

  BallState encode(const BallSpace& space, const Vec& x) const {
    require(x.size() == space.dim(), "encode: direction has the wrong dimension");
    require_unit(x, "encoded direction");
    switch (kind_) {
      case Kind::canonical:
        return codeword(space, x, lambda_);
      case Kind::custom: {
        BallState s = map_(space, x);
        check_state_dim(space, s);
        return s;
      }
      case Kind::twisted_2d: {
        require(space.dim() == 2, "twisted encoding used on a space with d != 2");
        const Vec turned = planar_rotation(2, 0, 1, theta_(lambda_)) * x;
        return BallState(lambda_ * space.bloch_direction(turned));
      }
    }
    throw InputError("encode: unknown encoding kind");
  }

 private:
  EncodingScheme() = default;
  Kind kind_ = Kind::canonical;
  double lambda_ = 1.0;
  Map map_;
  AngleMap theta_;
};

/// Decode, then undo the purity-dependent rotation R_{theta(|omega|)}.
inline DecodeResult twisted_decode_2d(const BallSpace& space, const std::vector<ProbabilityRecord>& records,
                                      const EncodingScheme::AngleMap& theta, std::int64_t shots_used = 0) {
  require(space.dim() == 2, "twisted_decode_2d: requires d = 2");
  DecodeResult r = decode_probabilities(space, records, shots_used);
  const Rotation undo = planar_rotation(2, 0, 1, -theta(r.bloch_norm));
  r.estimate = undo * r.estimate;
  r.secondary_estimate = undo * r.secondary_estimate;
  return r;
}

inline DecodeResult twisted_decode_2d(const BallSpace& space, const std::vector<ShotRecord>& records,
                                      const EncodingScheme::AngleMap& theta) {
  std::int64_t shots = 0;
  for (const ShotRecord& r : records) shots += r.trials;
  return twisted_decode_2d(space, to_probabilities(records), theta, shots);
}

// ---------------------------------------------------------------------------
// Standardization

struct StandardizedCodeword {
  BallState state;
  Vec direction;  ///< physical direction y at which L is maximal
  double standard_error = 0.0;
};

/// Replaces omega(x) by its average over the stabilizer of the L-maximizing
/// direction y. On a ball the maximizer is unique, y = O^T w / |w|, so the
/// result has a strict L maximum at y; this is checked on a direction grid.
inline StandardizedCodeword standardize_codeword(const BallSpace& space, const EncodingScheme& encoding, const Vec& x,
                                                 int quadrature_size = 64, std::uint64_t seed = 0) {
  const BallState w = encoding.encode(space, x);
  if (!(w.norm() > 1e-9)) {
    throw NoDirectionInformation("standardize_codeword: L vanishes in every direction; the encoding carries no direction");
  }
  const Vec y = space.physical_direction(w.bloch()).normalized();
  const StabilizerAverage avg = stabilizer_average(space, w, y, quadrature_size, seed);
  StandardizedCodeword out{avg.state, y, avg.standard_error};

  const double at_y = l_functional(space, y, avg.state);
  if (!(at_y > 0.0)) throw VerificationFailure("standardize_codeword: L is not positive at the maximizer");
  const double exclusion = std::max(1e-6, 10.0 * avg.standard_error / avg.state.norm());
  for (const Vec& z : detail::search_grid(space.dim())) {
    if (angle_between(z, y) <= exclusion) continue;
    if (l_functional(space, z, avg.state) >= at_y) {
      throw VerificationFailure("standardize_codeword: L maximum at y is not strict");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivariance

struct EquivarianceReport {
  Vec direct_estimate;
  Vec rotated_estimate;  ///< R times the estimate decoded from G_{R^-1} omega(x)
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool within_error = false;
};

inline EquivarianceReport equivariance_test(const BallSpace& space, const EncodingScheme& encoding, const Rotation& r,
                                            const Vec& x, std::int64_t shots, std::uint64_t seed,
                                            int direction_count = 20) {
  require(r.dim() == space.dim(), "equivariance_test: rotation has the wrong dimension");
  const std::vector<Vec> dirs = default_directions(space.dim(), std::max(direction_count, space.dim() + 1), seed);
  const BallState w = encoding.encode(space, x);
  const BallState turned = act(space, r.inverse(), w);
  const DecodeResult direct = decode(space, simulate_shots(space, w, dirs, shots, derive_seed(seed, 0)));
  const DecodeResult back = decode(space, simulate_shots(space, turned, dirs, shots, derive_seed(seed, 1)));
  EquivarianceReport out;
  out.direct_estimate = direct.estimate;
  out.rotated_estimate = r * back.estimate;
  out.discrepancy = angle_between(out.direct_estimate, out.rotated_estimate);
  out.tolerance = 3.0 * std::hypot(direct.angular_standard_error, back.angular_standard_error) + 1e-9;
  out.within_error = out.discrepancy <= out.tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Repeated transmission experiment

struct TransmissionTrial {
  Vec sent;
  Vec received;
  double angular_error = 0.0;  ///< radians
  double bloch_norm = 0.0;
  bool consistent = false;
};

/// Sent direction and Bob's shot records for one trial of run_transmission.
inline std::pair<Vec, std::vector<ShotRecord>> transmission_shots(const BallSpace& space, double lambda,
                                                                  int direction_count, std::int64_t shots,
                                                                  std::uint64_t seed, int trial) {
  const EncodingScheme enc = EncodingScheme::canonical(lambda);
  const std::vector<Vec> dirs = default_directions(space.dim(), direction_count, seed);
  Rng rng = make_rng(derive_seed(seed, trial, 0));
  Vec x = random_unit_vector(space.dim(), rng);
  auto records = simulate_shots(space, enc.encode(space, x), dirs, shots, derive_seed(seed, trial, 1));
  return {std::move(x), std::move(records)};
}

/// Alice draws a uniformly random direction per trial, encodes it canonically,
/// Bob measures `direction_count` default directions with `shots` each and decodes.
inline std::vector<TransmissionTrial> run_transmission(const BallSpace& space, double lambda, int direction_count,
                                                       std::int64_t shots, int trials, std::uint64_t seed) {
  require(trials >= 1, "run_transmission: trials must be >= 1");
  std::vector<TransmissionTrial> out(trials);
  for (int t = 0; t < trials; ++t) {
    const auto [x, records] = transmission_shots(space, lambda, direction_count, shots, seed, t);
    const DecodeResult r = decode(space, records);
    out[t] = {x, r.estimate, angle_between(x, r.estimate), r.bloch_norm, r.consistent};
  }
  return out;
}

}  // namespace dirbit
