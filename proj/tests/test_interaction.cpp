#include "dirbit/interaction.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace dirbit;

namespace {

constexpr double kPi = std::numbers::pi;

// Generator of the rotation taking e_i towards e_j.
Mat plane_generator(int d, int i, int j) {
  Mat e = Mat::Zero(d, d);
  e(j, i) = 1.0;
  e(i, j) = -1.0;
  return e;
}

Mat rotation_matrix(int d, int i, int j, double t) {
  Mat r = Mat::Identity(d, d);
  r(i, i) = r(j, j) = std::cos(t);
  r(j, i) = std::sin(t);
  r(i, j) = -std::sin(t);
  return r;
}

CMat random_hermitian(Rng& rng) {
  CMat h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = Complex(gaussian_vector(1, rng)(0), gaussian_vector(1, rng)(0));
  return 0.5 * (h + h.adjoint());
}

CMat unitary(const CMat& h, double t) {
  const CMat a = Complex(0.0, -t) * h;
  return a.exp();
}

CMat cz_hamiltonian() {
  CMat h = CMat::Zero(4, 4);
  h(3, 3) = kPi;
  return h;
}

Vec coefficient_vector(const CMat& rho) {
  const Mat c = pauli_coefficients(rho);
  Vec out(16);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) out(mu * 4 + nu) = c(mu, nu);
  return out;
}

CMat density_of(const Vec& coeffs) {
  Mat c(4, 4);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) c(mu, nu) = coeffs(mu * 4 + nu);
  return density_from_coefficients(c);
}

CMat plus_plus() {
  CVec psi = CVec::Constant(4, Complex(0.5, 0.0));
  return psi * psi.adjoint();
}

Generator random_local(int d, Rng& rng) { return lift_local(random_antisymmetric(d, rng), random_antisymmetric(d, rng)); }

// Least-squares distance of W from the lifted-local subspace.
double local_residual(const Generator& g) {
  const int d = g.dim();
  std::vector<Mat> basis;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      basis.push_back(lift_local(plane_generator(d, i, j), Mat::Zero(d, d)).matrix());
      basis.push_back(lift_local(Mat::Zero(d, d), plane_generator(d, i, j)).matrix());
    }
  const int n = static_cast<int>(g.matrix().size());
  Mat a(n, basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) a.col(k) = basis[k].reshaped();
  const Vec target = g.matrix().reshaped();
  const Vec coef = a.colPivHouseholderQr().solve(target);
  return (a * coef - target).norm();
}

}  // namespace

// --- Generator -------------------------------------------------------------

TEST(Generator, RejectsNormalizationLeak) {
  Mat w = Mat::Zero(4, 4);
  w(0, 1) = 0.1;
  w(1, 0) = -0.1;
  EXPECT_THROW(Generator(1, w), InputError);
}

TEST(Generator, RejectsSymmetricPart) {
  Mat w = Mat::Zero(9, 9);
  w(1, 2) = w(2, 1) = 1.0;
  EXPECT_THROW(Generator(2, w), InputError);
}

TEST(Generator, ExponentialPreservesNormalization) {
  Rng rng = make_rng(3);
  for (int d : {2, 3, 4}) {
    const Generator g = random_block_diagonal(d, 10 + d);
    const Generator h = random_local(d, rng);
    for (int k = -8; k <= 8; ++k) {
      const double t = kPi * k / 8.0;
      for (const Generator* w : {&g, &h}) {
        const Mat e = w->exp(t);
        EXPECT_NEAR(e(0, 0), 1.0, 1e-10);
        EXPECT_LE(e.row(0).tail(e.cols() - 1).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

// --- lift_local ------------------------------------------------------------

TEST(LiftLocal, ZeroInputsGiveZero) {
  const Generator g = lift_local(Mat::Zero(3, 3), Mat::Zero(3, 3));
  EXPECT_EQ(g.matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(LiftLocal, ExponentialFactorizes) {
  Rng rng = make_rng(5);
  for (int d : {2, 3, 4}) {
    const Mat xa = random_antisymmetric(d, rng);
    const Mat xb = random_antisymmetric(d, rng);
    const Generator g = lift_local(xa, xb);
    for (int k = -6; k <= 6; ++k) {
      const double t = kPi * k / 6.0;
      const Mat expected = kron(Mat((t * embed_local(xa)).exp()), Mat((t * embed_local(xb)).exp()));
      EXPECT_LE((g.exp(t) - expected).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(LiftLocal, PlanarRotationsInTwoDimensions) {
  const Generator g = lift_local(plane_generator(2, 0, 1), 2.0 * plane_generator(2, 0, 1));
  const double t = kPi / 3.0;
  const Mat expected = kron(Mat(embed_local(rotation_matrix(2, 0, 1, t)) + unit_vector(3, 0) * unit_vector(3, 0).transpose()),
                            Mat(embed_local(rotation_matrix(2, 0, 1, 2.0 * t)) + unit_vector(3, 0) * unit_vector(3, 0).transpose()));
  EXPECT_LE((g.exp(t) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LiftLocal, RejectsNonAntisymmetric) {
  EXPECT_THROW(lift_local(Mat::Identity(2, 2), Mat::Zero(2, 2)), InputError);
}

TEST(LiftLocal, BlockDecompositionHasNoInteraction) {
  Rng rng = make_rng(8);
  for (int d : {1, 2, 3, 5}) {
    const BlockDecomposition b = decompose(random_local(d, rng));
    EXPECT_TRUE(b.block_diagonal());
    EXPECT_LE(b.v.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(b.scalar, 0.0);
  }
}

TEST(Decompose, RecoversPlacedBlocks) {
  Rng rng = make_rng(9);
  const int d = 3;
  const Mat x = random_antisymmetric(d, rng);
  const Mat y = random_antisymmetric(d, rng);
  const Mat z = random_antisymmetric(d * d, rng);
  const BlockDecomposition b = decompose(block_diagonal_generator(x, y, z));
  EXPECT_LE((b.x - x).norm(), 1e-14);
  EXPECT_LE((b.y - y).norm(), 1e-14);
  EXPECT_LE((b.z - z).norm(), 1e-14);
  EXPECT_LE(antisymmetry_defect(b.v), 1e-10);
  // The A-local block must act on A's Bloch components.
  const Generator g = lift_local(x, Mat::Zero(d, d));
  EXPECT_LE((decompose(g).x - x).norm(), 1e-14);
  EXPECT_LE(decompose(g).y.norm(), 1e-14);
}

// --- circuit_f -------------------------------------------------------------

TEST(CircuitF, ZeroGeneratorIsOne) {
  const Generator g = Generator::zero(3);
  Rng rng = make_rng(1);
  for (double t : {-2.0, 0.0, 0.7, 3.0})
    EXPECT_NEAR(circuit_f(g, random_unit_vector(3, rng), random_unit_vector(3, rng), t), 1.0, 1e-15);
}

TEST(CircuitF, OneAtTimeZero) {
  Rng rng = make_rng(2);
  for (int d : {2, 4}) {
    const Generator g = random_block_diagonal(d, d);
    EXPECT_NEAR(circuit_f(g, random_unit_vector(d, rng), random_unit_vector(d, rng), 0.0), 1.0, 1e-14);
  }
}

TEST(CircuitF, LocalRotationOrthogonalAxis) {
  // Rotation in the (x, y) plane, prepared along x: f = (1 + cos t) / 2.
  const Generator g = lift_local(plane_generator(3, 0, 1), Mat::Zero(3, 3));
  const Vec x = unit_vector(3, 0);
  const Vec y = unit_vector(3, 2);
  for (double t : {-1.0, 0.3, 1.5, kPi})
    EXPECT_NEAR(circuit_f(g, x, y, t), 0.5 * (1.0 + std::cos(t)), 1e-12);
}

TEST(CircuitF, ControlledPhaseKeepsBasisProduct) {
  const Generator g = quantum_generator(cz_hamiltonian());
  const Vec z = unit_vector(3, 2);
  for (double t : {0.2, 1.0, 2.5}) EXPECT_NEAR(circuit_f(g, z, z, t), 1.0, 1e-12);
}

TEST(CircuitF, MatchesTwoQubitProbability) {
  Rng rng = make_rng(4);
  const CMat h = random_hermitian(rng);
  const Generator g = quantum_generator(h);
  const Vec x = random_unit_vector(3, rng);
  const Vec y = random_unit_vector(3, rng);
  auto proj = [](const Vec& v) { return CMat(0.5 * (pauli(0) + v(0) * pauli(1) + v(1) * pauli(2) + v(2) * pauli(3))); };
  const CMat p = ckron(proj(x), proj(y));
  const double t = 0.8;
  const CMat u = unitary(h, t);
  EXPECT_NEAR(circuit_f(g, x, y, t), (p * u * p * u.adjoint()).trace().real(), 1e-10);
}

TEST(CircuitF, RejectsNoisySpace) {
  const Generator g = Generator::zero(2);
  EXPECT_THROW(circuit_f(BallSpace(2, 0.8, 0.5), g, unit_vector(2, 0), unit_vector(2, 1), 0.1), InputError);
}

// --- derivative_constraints ------------------------------------------------

TEST(DerivativeConstraints, LocalRotations) {
  Rng rng = make_rng(11);
  for (int d : {2, 3, 5}) {
    const Generator g = random_local(d, rng);
    const auto rep = derivative_constraints(g, random_direction_pairs(d, 200, 12));
    EXPECT_LE(rep.max_abs_first, 1e-12);
    EXPECT_LE(rep.max_second, 1e-12);
  }
}

TEST(DerivativeConstraints, QuantumGenerators) {
  Rng rng = make_rng(13);
  for (int k = 0; k < 10; ++k) {
    const auto rep = derivative_constraints(quantum_generator(random_hermitian(rng)), random_direction_pairs(3, 100, k));
    EXPECT_LE(rep.max_abs_first, 1e-10);
  }
}

TEST(DerivativeConstraints, PlantedSymmetricPartIsFound) {
  // The symmetric part escapes the Generator gauge check, so plant it on the
  // evaluation side: compare f'(0) of W and of W + S through probabilities.
  Rng rng = make_rng(14);
  const int d = 3;
  const int n = (d + 1) * (d + 1);
  Mat s = gaussian_matrix(n, n, rng);
  s = 0.5 * (s + s.transpose());
  s.row(0).setZero();
  s.col(0).setZero();
  const auto samples = random_direction_pairs(d, 100, 15);
  double worst = 0.0;
  for (const auto& [x, y] : samples) {
    const Vec p = kron(with_normalization(x), with_normalization(y));
    worst = std::max(worst, std::abs(0.25 * p.dot(s * p)));
  }
  EXPECT_GT(worst, 1e-3);
  EXPECT_THROW(Generator(d, s), InputError);
}

TEST(DerivativeConstraints, AnalyticMatchesFiniteDifferences) {
  Rng rng = make_rng(16);
  std::vector<std::pair<Vec, Vec>> one(1);
  for (int k = 0; k < 1000; ++k) {
    const int d = 2 + k % 3;
    const Generator g = k % 2 ? random_block_diagonal(d, derive_seed(17, k)) : random_local(d, rng);
    one[0] = {random_unit_vector(d, rng), random_unit_vector(d, rng)};
    const auto rep = derivative_constraints(g, one);
    EXPECT_LE(rep.max_fd_discrepancy, 1e-6);
  }
}

TEST(DerivativeConstraints, SecondDerivativeAlignedIsNonPositive) {
  for (int d : {2, 4}) {
    const auto rep = derivative_constraints(random_block_diagonal(d, 40 + d), random_direction_pairs(d, 300, 41));
    EXPECT_LE(rep.max_second, 1e-12);
  }
}

// --- admissibility_scan ----------------------------------------------------

TEST(AdmissibilityScan, LocalGeneratorsPass) {
  Rng rng = make_rng(20);
  for (int d : {1, 2, 3, 5}) {
    ScanOptions opt;
    opt.pairs = 100;
    opt.times = 8;
    opt.effect_grid = 60;
    const ScanResult r = admissibility_scan(random_local(d, rng), opt);
    EXPECT_TRUE(r.pass) << d;
    EXPECT_EQ(r.samples_checked, 800u);
    EXPECT_GE(r.min_probability, -1e-12);
    EXPECT_LE(r.max_probability, 1.0 + 1e-12);
  }
}

TEST(AdmissibilityScan, CorrelationOnlyGeneratorFails) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed);
    Mat v = random_antisymmetric(4, rng);
    v /= v.norm();
    const Generator g = block_diagonal_generator(Mat::Zero(2, 2), Mat::Zero(2, 2), v);
    ScanOptions opt;
    opt.seed = seed;
    const ScanResult r = admissibility_scan(g, opt);
    ASSERT_FALSE(r.pass);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_LT(r.witness->value, -1e-9);
    EXPECT_LE(r.samples_checked, 10000u);
    // Replay the witness directly.
    const ScanWitness& w = *r.witness;
    const Vec state = g.exp(w.t) * kron(with_normalization(w.x), with_normalization(w.y));
    const Vec effect = 0.25 * kron(with_normalization(w.u), with_normalization(w.v));
    EXPECT_NEAR(effect.dot(state), w.value, 1e-12);
  }
}

TEST(AdmissibilityScan, QuantumGeneratorsPass) {
  Rng rng = make_rng(21);
  for (int k = 0; k < 3; ++k) {
    ScanOptions opt;
    opt.pairs = 60;
    opt.seed = k;
    const ScanResult r = admissibility_scan(quantum_generator(random_hermitian(rng)), opt);
    EXPECT_TRUE(r.pass);
  }
}

TEST(AdmissibilityScan, DeterministicAcrossThreadCounts) {
  const Generator g = random_block_diagonal(3, 22);
  ScanOptions opt;
  opt.pairs = 50;
  ::setenv("DIRBIT_THREADS", "1", 1);
  const ScanResult a = admissibility_scan(g, opt);
  ::setenv("DIRBIT_THREADS", "4", 1);
  const ScanResult b = admissibility_scan(g, opt);
  ::unsetenv("DIRBIT_THREADS");
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_EQ(a.samples_checked, b.samples_checked);
  EXPECT_EQ(a.min_probability, b.min_probability);
}

// --- block_reject ----------------------------------------------------------

TEST(BlockReject, ZeroPasses) {
  const BlockRejectResult r = block_reject(Mat::Zero(9, 9));
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(BlockReject, SingleRotationInTwoDimensions) {
  Mat v = Mat::Zero(4, 4);
  v(0, 1) = 1.0;
  v(1, 0) = -1.0;
  const BlockRejectResult r = block_reject(v);
  ASSERT_FALSE(r.pass);
  ASSERT_TRUE(r.witness.has_value());
  const Vec p = kron(r.witness->first, r.witness->second);
  EXPECT_NEAR(r.witness->first.norm(), 1.0, 1e-12);
  EXPECT_NEAR(r.witness->second.norm(), 1.0, 1e-12);
  EXPECT_NEAR(p.dot(v * v * p), r.value, 1e-12);
  EXPECT_LT(r.value, 0.0);
  // V^2 = -diag(1, 1, 0, 0): a = e_0 reaches the most negative value.
  EXPECT_NEAR(r.value, -1.0, 1e-12);
}

TEST(BlockReject, TraceIdentity) {
  Rng rng = make_rng(30);
  for (int d : {2, 3, 4, 5}) {
    const Mat v = random_antisymmetric(d * d, rng);
    const BlockRejectResult r = block_reject(v);
    EXPECT_NEAR(r.trace_v2, -r.frobenius_sq, 1e-10 * std::max(1.0, r.frobenius_sq));
    EXPECT_FALSE(r.pass);
    EXPECT_LT(r.value, 0.0);
  }
}

TEST(BlockReject, NeverPassesNonzero) {
  Rng rng = make_rng(31);
  for (int k = 0; k < 200; ++k) {
    const int d = 2 + k % 4;
    Mat v = Mat::Zero(d * d, d * d);
    // Sparse and tiny perturbations too.
    const int i = k % (d * d);
    const int j = (k / 3 + 1 + i) % (d * d);
    if (i == j) continue;
    v(i, j) = 1e-6 * (1 + k);
    v(j, i) = -v(i, j);
    if (k % 5 == 0) v += 1e-3 * random_antisymmetric(d * d, rng);
    const BlockRejectResult r = block_reject(v);
    EXPECT_FALSE(r.pass);
    EXPECT_LT(r.value, 0.0);
  }
}

TEST(BlockReject, RejectsSymmetricInput) { EXPECT_THROW(block_reject(Mat::Identity(4, 4)), InputError); }

TEST(BlockReject, RandomBlockDiagonalGeneratorsRejected) {
  for (int d : {2, 4, 5}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Generator g = random_block_diagonal(d, derive_seed(32, d, s));
      const BlockDiagonalRejection r = reject_block_diagonal(g);
      EXPECT_NEAR(r.blocks.v.norm(), 1.0, 1e-12);
      EXPECT_FALSE(r.second_order.pass);
      EXPECT_FALSE(r.scan.pass);
      ASSERT_TRUE(r.scan.witness.has_value());
      EXPECT_LE(r.scan.samples_checked, 10000u);
    }
  }
}

// --- quantum_generator -----------------------------------------------------

TEST(QuantumGenerator, IdentityGivesZero) {
  const Generator g = quantum_generator(CMat::Identity(4, 4));
  EXPECT_LE(g.matrix().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QuantumGenerator, LocalZIsBlochRotation) {
  const Generator g = quantum_generator(pauli2(3, 0));
  // -i[sigma_z, sigma_x] = 2 sigma_y.
  const Generator expected = lift_local(2.0 * plane_generator(3, 0, 1), Mat::Zero(3, 3));
  EXPECT_LE((g.matrix() - expected.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QuantumGenerator, ControlledPhaseIsInteracting) {
  const Generator g = quantum_generator(cz_hamiltonian());
  const BlockDecomposition b = decompose(g);
  // The zz term only couples local and correlation sectors; the diagonal
  // blocks are those of the local z terms, so V vanishes.
  EXPECT_LE(b.v.norm(), 1e-12);
  EXPECT_GT(b.off_block_norm, 0.1);
  EXPECT_FALSE(b.block_diagonal());
  EXPECT_GT(local_residual(g), 0.1);
  EXPECT_LE(local_residual(quantum_generator(pauli2(1, 0) + 0.3 * pauli2(0, 2))), 1e-12);
}

TEST(QuantumGenerator, MatchesUnitaryConjugation) {
  Rng rng = make_rng(40);
  for (int k = 0; k < 10; ++k) {
    const CMat h = random_hermitian(rng);
    const CMat rho0 = [&] {
      CMat a = CMat::Zero(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = Complex(gaussian_vector(1, rng)(0), gaussian_vector(1, rng)(0));
      CMat r = a * a.adjoint();
      return CMat(r / r.trace());
    }();
    const Generator g = quantum_generator(h);
    for (double t : {-1.3, 0.4, 2.0}) {
      const CMat u = unitary(h, t);
      const Vec expected = coefficient_vector(u * rho0 * u.adjoint());
      EXPECT_LE((g.exp(t) * coefficient_vector(rho0) - expected).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(QuantumGenerator, LieHomomorphism) {
  Rng rng = make_rng(41);
  for (int k = 0; k < 20; ++k) {
    const CMat h1 = random_hermitian(rng);
    const CMat h2 = random_hermitian(rng);
    const CMat k12 = Complex(0.0, -1.0) * (h1 * h2 - h2 * h1);
    const Mat w1 = quantum_generator(h1).matrix();
    const Mat w2 = quantum_generator(h2).matrix();
    EXPECT_LE((quantum_generator(k12).matrix() - (w1 * w2 - w2 * w1)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(QuantumGenerator, RejectsNonHermitian) {
  CMat h = CMat::Zero(4, 4);
  h(0, 1) = 1.0;
  EXPECT_THROW(quantum_generator(h), InputError);
  EXPECT_THROW(quantum_generator(CMat::Identity(2, 2)), InputError);
}

// --- negativity ------------------------------------------------------------

TEST(Negativity, ProductAndMixedStatesAreZero) {
  Rng rng = make_rng(50);
  EXPECT_NEAR(negativity(CMat::Identity(4, 4) / 4.0), 0.0, 1e-15);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_unit_vector(3, rng);
    const Vec y = random_unit_vector(3, rng);
    const CMat rho = density_of(product(BallState(x), BallState(y)).coefficients());
    EXPECT_NEAR(negativity(rho), 0.0, 1e-12);
  }
}

TEST(Negativity, ControlledPhaseOnPlusPlus) {
  const CMat u = unitary(cz_hamiltonian(), 1.0);
  EXPECT_NEAR(negativity(u * plus_plus() * u.adjoint()), 0.5, 1e-9);
  // The same through the generator.
  const Generator g = quantum_generator(cz_hamiltonian());
  EXPECT_NEAR(negativity(density_of(g.exp(1.0) * coefficient_vector(plus_plus()))), 0.5, 1e-9);
}

TEST(Negativity, EntanglementGeneratedOnlyByInteraction) {
  const Generator cz = quantum_generator(cz_hamiltonian());
  const Vec start = coefficient_vector(plus_plus());
  for (int k = 0; k <= 32; ++k) {
    const double t = 0.2 + 1.6 * (k + 0.5) / 33.0;
    EXPECT_GT(negativity(density_of(cz.exp(t) * start)), 1e-3) << t;
  }
  Rng rng = make_rng(51);
  for (int k = 0; k < 5; ++k) {
    const Generator local = random_local(3, rng);
    for (double t : {0.3, 1.0, 2.9}) EXPECT_NEAR(negativity(density_of(local.exp(t) * start)), 0.0, 1e-10);
  }
}

TEST(Negativity, RejectsInvalidInput) {
  EXPECT_THROW(negativity(CMat::Identity(4, 4)), InputError);
  CMat bad = CMat::Zero(4, 4);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(negativity(bad), InputError);
}

// --- feasible_generator_space ----------------------------------------------

TEST(FeasibleSpace, LocalDimension) {
  for (int d : {1, 2, 3, 4}) {
    const FeasibleSpaceReport r = feasible_generator_space(d, 1, 0, ScanOptions{.pairs = 1, .times = 1});
    EXPECT_EQ(r.local_dim, d * (d - 1));
  }
}

TEST(FeasibleSpace, QuantumGeneratorsAreFeasibleInThreeDimensions) {
  ScanOptions scan;
  scan.pairs = 60;
  const FeasibleSpaceReport r = feasible_generator_space(3, 60, 7, scan);
  EXPECT_FALSE(r.inconclusive);
  EXPECT_EQ(r.intersection_dim, 6);
  const auto pairs = detail::antisymmetric_pairs(16);
  Mat basis(pairs.size(), r.basis.size());
  for (std::size_t c = 0; c < r.basis.size(); ++c) basis.col(c) = detail::to_parameters(r.basis[c], pairs);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      if (mu == 0 && nu == 0) continue;
      const Generator g = quantum_generator(pauli2(mu, nu));
      const Vec theta = detail::to_parameters(g.matrix(), pairs);
      const Vec proj = basis * (basis.transpose() * theta);
      EXPECT_LE((proj - theta).norm(), 1e-9) << mu << nu;
      EXPECT_TRUE(admissibility_scan(g, scan).pass);
    }
  EXPECT_GE(r.feasible_dim, 15);
  EXPECT_EQ(r.nonlocal_directions.size(), static_cast<std::size_t>(r.feasible_dim - r.intersection_dim));
  // First-order constraints alone leave more than the quantum directions;
  // whatever fails must come with a witness.
  for (const ScanResult& v : r.nonlocal_verdicts) EXPECT_EQ(v.pass, !v.witness.has_value());
}

TEST(FeasibleSpace, NonLocalCandidatesFailInTwoDimensions) {
  const FeasibleSpaceReport r = feasible_generator_space(2, 60, 1);
  EXPECT_FALSE(r.inconclusive);
  EXPECT_EQ(r.intersection_dim, r.local_dim);
  EXPECT_EQ(r.nonlocal_directions.size(), r.nonlocal_verdicts.size());
  for (const ScanResult& v : r.nonlocal_verdicts) {
    EXPECT_FALSE(v.pass);
    EXPECT_TRUE(v.witness.has_value());
  }
}

TEST(FeasibleSpace, FewSamplesAreInconclusive) {
  const FeasibleSpaceReport r = feasible_generator_space(3, 2, 0, ScanOptions{.pairs = 1, .times = 1});
  EXPECT_TRUE(r.inconclusive);
}
