#include "dirbit/framebit.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace dirbit;

namespace {

Mat random_symmetric_trace_one(Rng& rng) {
  Mat g = gaussian_matrix(4, 4, rng);
  Mat s = 0.5 * (g + g.transpose());
  s.diagonal().array() += (1.0 - s.trace()) / 4.0;
  return s;
}

Mat random_orbitope_point(Rng& rng) {
  // Convex combination of a few pure frames.
  const int k = 1 + static_cast<int>(rng() % 5);
  Vec w = Vec::NullaryExpr(k, [&](Eigen::Index) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); });
  w /= w.sum();
  Mat m = Mat::Zero(3, 3);
  for (int i = 0; i < k; ++i) m += w(i) * haar_sample(3, rng()).matrix();
  return m;
}

}  // namespace

TEST(UToM, PureBasisStateGivesIdentity) {
  Mat u = Mat::Zero(4, 4);
  u(0, 0) = 1.0;
  EXPECT_LE((u_to_m(RealDensity4(u)).m - Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(UToM, MaximallyMixedGivesCenter) {
  EXPECT_LE(u_to_m(RealDensity4(Mat::Identity(4, 4) / 4.0)).m.norm(), 1e-15);
}

TEST(UToM, DiagonalCounterexampleState) {
  Mat u = Mat::Zero(4, 4);
  u.diagonal() << 6, 4, 2, 1;
  u /= 13.0;
  Mat expected = Mat::Zero(3, 3);
  expected.diagonal() << 7, 3, 1;
  expected /= 13.0;
  EXPECT_LE((u_to_m(RealDensity4(u)).m - expected).norm(), 1e-15);
}

TEST(UToM, RankOneStatesAreQuaternionRotations) {
  // A unit vector q in R^4 read as a quaternion (w, x, y, z) gives the
  // rotation matrix of that quaternion.
  Rng rng = make_rng(3);
  for (int k = 0; k < 200; ++k) {
    const Vec q = random_unit_vector(4, rng);
    const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
    const Mat expected = quat.toRotationMatrix();
    EXPECT_LE((u_to_m(RealDensity4(q * q.transpose())).m - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(UToM, RoundTripOnAffineSpan) {
  Rng rng = make_rng(4);
  for (int k = 0; k < 1000; ++k) {
    const Mat u = random_symmetric_trace_one(rng);
    EXPECT_LE((m_to_u(u_to_m_affine(u)) - u).cwiseAbs().maxCoeff(), 1e-12);
    const Mat m = gaussian_matrix(3, 3, rng);
    const Mat back = m_to_u(m);
    EXPECT_NEAR(back.trace(), 1.0, 1e-12);
    EXPECT_LE((u_to_m_affine(back) - m).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(UToM, OperatorNormAtMostOne) {
  Rng rng = make_rng(5);
  for (int k = 0; k < 500; ++k) {
    const Mat g = gaussian_matrix(4, 4, rng);
    Mat u = g * g.transpose();
    u /= u.trace();
    const FrameBlochM m = u_to_m(RealDensity4(u));
    EXPECT_LE(Eigen::JacobiSVD<Mat>(m.m).singularValues()(0), 1.0 + 1e-9);
    EXPECT_TRUE(in_orbitope(m));
  }
}

TEST(UToM, RejectsInvalidDensity) {
  Mat u = Mat::Identity(4, 4) / 4.0;
  u(0, 1) = 0.1;
  EXPECT_THROW(RealDensity4{u}, InputError);
  Mat neg = Mat::Zero(4, 4);
  neg.diagonal() << 1.2, -0.2, 0.0, 0.0;
  EXPECT_THROW(RealDensity4{neg}, InputError);
  EXPECT_THROW(RealDensity4{Mat::Identity(4, 4) / 3.0}, InputError);
}

TEST(Orbitope, RotationMixturesAreInsideAndScaledIdentityBeyondIsNot) {
  Rng rng = make_rng(6);
  for (int k = 0; k < 200; ++k) EXPECT_TRUE(in_orbitope(FrameBlochM(random_orbitope_point(rng))));
  // -I has operator norm 1 but is not a mixture of rotations (det of every
  // rotation is +1; -I/3 is the extreme reachable along that ray).
  EXPECT_FALSE(in_orbitope(FrameBlochM(-Mat::Identity(3, 3))));
  EXPECT_TRUE(in_orbitope(FrameBlochM(-Mat::Identity(3, 3) / 3.0)));
  EXPECT_FALSE(in_orbitope(FrameBlochM(-Mat::Identity(3, 3) * 0.34)));
}

TEST(FrameEffect, Examples) {
  const Rotation id = Rotation::identity(3);
  EXPECT_DOUBLE_EQ(frame_effect(id, FrameBlochM::pure(id)), 1.0);
  const Rotation half_turn = planar_rotation(3, 0, 1, std::numbers::pi);
  EXPECT_NEAR(frame_effect(half_turn, FrameBlochM(Mat::Identity(3, 3))), 0.0, 1e-15);
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_DOUBLE_EQ(frame_effect(haar_sample(3, s), FrameBlochM::center()), 0.25);
}

TEST(FrameEffect, RejectsNonRotations) {
  Mat reflect = Mat::Identity(3, 3);
  reflect(2, 2) = -1.0;
  EXPECT_THROW(frame_effect(reflect, FrameBlochM::center()), InputError);
  EXPECT_THROW(frame_effect(Mat::Identity(3, 3) * 1.01, FrameBlochM::center()), InputError);
  EXPECT_THROW(frame_effect(Rotation::identity(2), FrameBlochM::center()), InputError);
}

TEST(FrameEffect, ProbabilityOnPureFrames) {
  for (std::uint64_t z = 0; z < 1000; ++z) {
    const FrameBlochM state = FrameBlochM::pure(haar_sample(3, derive_seed(11, z)));
    for (std::uint64_t y = 0; y < 100; ++y) {
      const double p = frame_effect(haar_sample(3, derive_seed(12, z, y)), state);
      ASSERT_GE(p, -1e-15);
      ASSERT_LE(p, 1.0 + 1e-15);
    }
  }
}

TEST(FrameEffect, RotationCovariance) {
  Rng rng = make_rng(13);
  for (int k = 0; k < 1000; ++k) {
    const Rotation y = haar_sample(3, rng());
    const Rotation r = haar_sample(3, rng());
    const FrameBlochM m(random_orbitope_point(rng));
    const double lhs = frame_effect(y, FrameBlochM(r.matrix() * m.m));
    const double rhs = frame_effect(r.inverse() * y, m);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(FrameEffect, EqualsOneOnlyAtTheFrame) {
  const Rotation y = haar_sample(3, 77);
  EXPECT_NEAR(frame_effect(y, FrameBlochM::pure(y)), 1.0, 1e-14);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Rotation z = haar_sample(3, derive_seed(78, s));
    EXPECT_LT(frame_effect(y, FrameBlochM::pure(z)), 1.0 - 1e-6);
  }
}

TEST(Maximizer, CounterexampleDiagonalStatesHaveIdentity) {
  Mat m = Mat::Zero(3, 3);
  m.diagonal() << 7, 3, 1;
  const FrameMaximizer a = unique_maximizer(FrameBlochM(m / 13.0));
  EXPECT_TRUE(a.unique);
  EXPECT_LE((a.rotation.matrix() - Mat::Identity(3, 3)).norm(), 1e-12);
  m.diagonal() << 1, 1, 14;
  const FrameMaximizer b = unique_maximizer(FrameBlochM(m / 20.0));
  EXPECT_TRUE(b.unique);
  EXPECT_LE((b.rotation.matrix() - Mat::Identity(3, 3)).norm(), 1e-12);
}

TEST(Maximizer, CenterIsDegenerate) { EXPECT_FALSE(unique_maximizer(FrameBlochM::center()).unique); }

TEST(Maximizer, PureFrameIsItsOwnMaximizer) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Rotation z = haar_sample(3, s);
    const FrameMaximizer r = unique_maximizer(FrameBlochM::pure(z));
    EXPECT_TRUE(r.unique);
    EXPECT_LE((r.rotation.matrix() - z.matrix()).norm(), 1e-10);
    EXPECT_NEAR(r.value, 3.0, 1e-12);
  }
}

TEST(Maximizer, NegativeDeterminantInputUsesSignedSingularValue) {
  // M = diag(1, 1, -1): I and the half turn about e1 both reach 1, so the
  // maximizer is not unique.
  Mat m = Mat::Identity(3, 3);
  m(2, 2) = -1.0;
  const FrameMaximizer r = unique_maximizer(FrameBlochM(m));
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_FALSE(r.unique);
  m(2, 2) = -0.5;
  const FrameMaximizer u = unique_maximizer(FrameBlochM(m));
  EXPECT_TRUE(u.unique);
  EXPECT_NEAR(u.value, 1.5, 1e-12);
  EXPECT_LE((u.rotation.matrix() - Mat::Identity(3, 3)).norm(), 1e-10);
}

TEST(Maximizer, BeatsTenThousandSampledRotations) {
  Rng rng = make_rng(21);
  for (int k = 0; k < 10; ++k) {
    const FrameBlochM m(gaussian_matrix(3, 3, rng));
    const FrameMaximizer exact = unique_maximizer(m);
    const FrameMaximizer sampled = sampled_maximizer(m, 10000, rng());
    EXPECT_NEAR(exact.value, (exact.rotation.matrix().transpose() * m.m).trace(), 1e-12);
    EXPECT_GE(exact.value, sampled.value - 1e-12);
    // Sampling gets close: 10^4 Haar points are ~0.1 rad apart.
    EXPECT_LT(exact.value - sampled.value, 0.05 * m.m.norm());
  }
}

TEST(Norms, RotationMixturesDoNotIncreaseNorms) {
  Rng rng = make_rng(31);
  for (int k = 0; k < 1000; ++k) {
    const Mat m = random_orbitope_point(rng);
    const int terms = 1 + static_cast<int>(rng() % 6);
    Vec w = Vec::NullaryExpr(terms, [&](Eigen::Index) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); });
    w /= w.sum();
    Mat mix = Mat::Zero(3, 3);
    for (int j = 0; j < terms; ++j) mix += w(j) * haar_sample(3, rng()).matrix() * m;
    EXPECT_LE(trace_norm(mix), trace_norm(m) + 1e-12);
    EXPECT_LE(frobenius_norm(mix), frobenius_norm(m) + 1e-12);
  }
}

TEST(Norms, TraceNormOfGeneralMatrixMatchesPolarTrace) {
  Rng rng = make_rng(32);
  for (int k = 0; k < 50; ++k) {
    const Mat m = gaussian_matrix(3, 3, rng);
    const Eigen::SelfAdjointEigenSolver<Mat> eig(m.transpose() * m);
    EXPECT_NEAR(trace_norm(m), eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum(), 1e-10);
  }
}

TEST(Counterexample, ExactValues) {
  const Assumption2Counterexample c = assumption2_counterexample();
  EXPECT_EQ(c.first.trace_norm_exact, Rational(11, 13));
  EXPECT_EQ(c.second.trace_norm_exact, Rational(4, 5));
  EXPECT_EQ(c.first.frobenius_squared_exact, Rational(59, 169));
  EXPECT_EQ(c.second.frobenius_squared_exact, Rational(198, 400));
  EXPECT_NEAR(c.first.frobenius_norm, std::sqrt(59.0) / 13.0, 1e-15);
  EXPECT_NEAR(c.second.frobenius_norm, std::sqrt(198.0) / 20.0, 1e-15);
  EXPECT_EQ(c.first.m_diagonal[0], Rational(7, 13));
  EXPECT_EQ(c.second.m_diagonal[2], Rational(14, 20));
  EXPECT_TRUE(c.trace_norm_first_larger);
  EXPECT_TRUE(c.frobenius_first_smaller);
  EXPECT_TRUE(c.first.maximizer.unique);
  EXPECT_TRUE(c.second.maximizer.unique);
  EXPECT_LE(c.first.sampled_best_value, c.first.maximizer.value + 1e-12);
}

TEST(Counterexample, BothAreValidStates) {
  const Assumption2Counterexample c = assumption2_counterexample();
  EXPECT_TRUE(in_orbitope(FrameBlochM(c.first.m)));
  EXPECT_TRUE(in_orbitope(FrameBlochM(c.second.m)));
  EXPECT_NEAR(frame_effect(Rotation::identity(3), FrameBlochM(c.first.m)), (11.0 / 13.0 + 1.0) / 4.0, 1e-15);
}
