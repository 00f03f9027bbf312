#include "polyest/observation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace polyest;

namespace {

Simplex point_simplex() {
  Simplex s;
  s.n = 1;
  s.C = Mat(0, 1);
  s.d = Vec(0);
  return s;
}

}  // namespace

TEST(TailNorm, SubGaussianUnitVector) {
  TailNormContext ctx(SubGaussian{1.0}, 2.0 / std::exp(2.0), Mat::Identity(2, 2), unit_ball(2, 2.0));
  EXPECT_NEAR(ctx.theta(), 2.0, 1e-12);
  EXPECT_NEAR(ctx.pi(Vec::Unit(2, 0)), 2.0, 1e-12);
}

TEST(TailNorm, ZeroVector) {
  const Mat A = (Mat(2, 1) << 0.5, 0.5).finished();
  TailNormContext g(SubGaussian{0.3}, 0.1, A, point_simplex());
  TailNormContext d(DiscreteScheme{3}, 0.1, A, point_simplex());
  TailNormContext p(PoissonScheme{}, 0.1, A, point_simplex());
  for (const auto* c : {&g, &d, &p}) EXPECT_EQ(c->pi(Vec::Zero(2)), 0.0);
}

TEST(TailNorm, DiscreteHandValue) {
  const Mat A = (Mat(2, 1) << 0.5, 0.5).finished();
  TailNormContext ctx(DiscreteScheme{1}, 2.0 / std::exp(1.0), A, point_simplex());
  EXPECT_NEAR(ctx.theta(), 1.0, 1e-12);
  EXPECT_NEAR(ctx.pi(Vec::Ones(2)), 10.0 / 3.0, 1e-9);
}

TEST(TailNorm, NormAxioms) {
  RngStream rng(21, 0);
  Mat A(3, 2);
  for (int k = 0; k < 6; ++k) A.data()[k] = 0.1 + rng.uniform();
  for (int j = 0; j < 2; ++j) A.col(j) /= A.col(j).sum();
  Simplex sx;
  sx.n = 2;
  sx.C = Mat(0, 2);
  sx.d = Vec(0);
  TailNormContext d(DiscreteScheme{5}, 0.05, A, sx);
  TailNormContext p(PoissonScheme{}, 0.05, 7.0 * A, sx);
  for (const auto* c : {&d, &p}) {
    for (int k = 0; k < 50; ++k) {
      const Vec h = rng.normal_vector(3);
      const Vec g = rng.normal_vector(3);
      const double a = rng.normal();
      EXPECT_NEAR(c->pi(a * h), std::abs(a) * c->pi(h), 1e-10 * (1 + c->pi(h)));
      EXPECT_LE(c->pi(h + g), c->pi(h) + c->pi(g) + 1e-12);
    }
  }
}

TEST(TailNorm, EmittedConstraintMatchesValue) {
  const Mat A = (Mat(2, 1) << 0.25, 0.75).finished();
  TailNormContext ctx(PoissonScheme{}, 0.1, 3.0 * A, point_simplex());
  const Vec h = (Vec(2) << 0.4, -1.3).finished();
  Program prog;
  Affine t = prog.scalar();
  std::vector<Affine> hv{h(0), h(1)};
  ctx.emit_pi_leq(prog, hv, t);
  prog.minimize(t);
  conic::Solution s = conic::solve(prog);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.value(t), ctx.pi(h), 1e-6);
}

TEST(ZSetTest, SubGaussianSingleton) {
  ZSet z = z_set(SubGaussian{1.0}, 0.1, 2, unit_ball(2, 2.0), Mat::Identity(2, 2));
  ASSERT_TRUE(z.is_singleton());
  EXPECT_NEAR(z.zbar()(0), 2.0 * std::log(40.0), 1e-12);
  EXPECT_NEAR(z.zbar()(1), 7.3778, 1e-4);
}

TEST(ZSetTest, PhiIsSumOfSupports) {
  Simplex sx;
  sx.n = 2;
  sx.C = Mat(0, 2);
  sx.d = Vec(0);
  const Mat A = (Mat(2, 2) << 0.7, 0.2, 0.3, 0.8).finished();
  ZSet z = ZSet::image_plus_simplex(2.0, 0.5, A, sx);
  const Vec r = (Vec(2) << 1.0, 3.0).finished();
  // support of A * simplex is the best column, support of the simplex is the largest entry
  const double expect = 2.0 * std::max(A.col(0).dot(r), A.col(1).dot(r)) + 0.5 * 3.0;
  EXPECT_NEAR(z.phi(r), expect, 1e-7);
}

TEST(Noise, DegenerateDiscrete) {
  RngStream rng(1, 0);
  const Mat A = Mat::Identity(2, 2);
  const Vec x = Vec::Unit(2, 0);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_noise(DiscreteScheme{1}, x, A, rng).norm(), 0.0);
}

TEST(Noise, ZeroRatePoisson) {
  RngStream rng(2, 0);
  const Mat A = Mat::Zero(3, 2);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_noise(PoissonScheme{}, Vec::Ones(2), A, rng).norm(), 0.0);
}

TEST(Noise, RejectsNegativeIntensity) {
  RngStream rng(3, 0);
  EXPECT_THROW(sample_noise(PoissonScheme{}, -Vec::Ones(2), Mat::Identity(2, 2), rng), std::invalid_argument);
}

TEST(Noise, GaussianMoments) {
  RngStream rng(4, 0);
  double s1 = 0, s2 = 0;
  const int N = 20000;
  for (int k = 0; k < N; ++k) {
    const double v = sample_noise(SubGaussian{0.5}, Vec::Zero(1), Mat::Identity(1, 1), rng)(0);
    s1 += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s1 / N, 0.0, 0.02);
  EXPECT_NEAR(s2 / N, 0.25, 0.02);
}

TEST(SchemeValidation, Requirements) {
  EXPECT_THROW(validate_scheme(PoissonScheme{}, unit_ball(2, 2.0), Mat::Identity(2, 2)), std::invalid_argument);
  EXPECT_THROW(validate_scheme(DiscreteScheme{2}, point_simplex(), Mat::Ones(2, 1)), std::invalid_argument);
  EXPECT_NO_THROW(validate_scheme(DiscreteScheme{2}, point_simplex(), 0.5 * Mat::Ones(2, 1)));
  EXPECT_THROW(TailNormContext(SubGaussian{1.0}, 1.5, Mat::Identity(2, 2), unit_ball(2, 2.0)), std::invalid_argument);
}
