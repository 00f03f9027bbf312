#include "oracles.hpp"
#include "polyest/rng.hpp"
#include "polyest/sets.hpp"

#include <gtest/gtest.h>

using namespace polyest;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST(SupportFunction, BoxDirection) {
  EXPECT_DOUBLE_EQ(support_function(make_box(-Vec::Ones(2), Vec::Ones(2)), v2(1, 0)), 1.0);
}

TEST(SupportFunction, L1BallIsLinfNorm) { EXPECT_DOUBLE_EQ(support_function(unit_ball(2, 1.0), v2(1, 2)), 2.0); }

TEST(SupportFunction, UnitDiskEllitope) {
  EXPECT_NEAR(support_function(unit_disk_ellitope(2), v2(3, 4)), 5.0, 1e-6);
}

TEST(SupportFunction, ScaledBallsMatchDualNorms) {
  RngStream rng(3, 0);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    Vec g(4);
    for (int i = 0; i < 4; ++i) g(i) = 0.5 + rng.uniform();
    Vec d = rng.normal_vector(4);
    const double q = p == 1.0 ? kInf : (std::isinf(p) ? 1.0 : p / (p - 1.0));
    EXPECT_NEAR(support_function(ScaledBall{g, p}, d), oracle::lp(d.cwiseQuotient(g), q), 1e-6) << "p=" << p;
  }
}

TEST(SupportFunction, SpectratopeBoxMatchesL1) {
  RngStream rng(4, 0);
  for (int k = 0; k < 5; ++k) {
    Vec d = rng.normal_vector(3);
    EXPECT_NEAR(support_function(box_as_spectratope(3), d), d.lpNorm<1>(), 1e-6);
  }
}

TEST(Symmetrize, ScaledBallUnchanged) {
  SignalSet s = symmetrize(unit_ball(3, 2.0));
  Vec d = (Vec(3) << 1, -2, 2).finished();
  EXPECT_NEAR(support_function(s, d), 3.0, 1e-6);
}

TEST(Symmetrize, ShiftedBoxCenters) {
  SignalSet s = symmetrize(make_box(Vec::Zero(3), Vec::Ones(3)));
  RngStream rng(5, 0);
  for (int k = 0; k < 5; ++k) {
    Vec d = rng.normal_vector(3);
    EXPECT_NEAR(support_function(s, d), 0.5 * d.lpNorm<1>(), 1e-6);
  }
}

TEST(Symmetrize, SimplexAgainstGrid) {
  Simplex sx;
  sx.n = 2;
  sx.C = Mat(0, 2);
  sx.d = Vec(0);
  SignalSet s = symmetrize(sx);
  RngStream rng(6, 0);
  for (int k = 0; k < 10; ++k) {
    Vec d = rng.normal_vector(2);
    // brute force over pairs of simplex points
    double best = -1e300;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        Vec x = v2(i / 200.0, 1 - i / 200.0);
        Vec y = v2(j / 200.0, 1 - j / 200.0);
        best = std::max(best, 0.5 * d.dot(x - y));
      }
    }
    EXPECT_NEAR(support_function(s, d), best, 1e-6);
    EXPECT_NEAR(best, 0.5 * (d.maxCoeff() - d.minCoeff()), 1e-12);
  }
}

TEST(Membership, BoxAndBall) {
  EXPECT_TRUE(contains(make_box(-Vec::Ones(2), Vec::Ones(2)), v2(1, -1)));
  EXPECT_FALSE(contains(make_box(-Vec::Ones(2), Vec::Ones(2)), v2(1.1, 0)));
  EXPECT_TRUE(contains(unit_ball(2, 1.0), v2(0.5, -0.5)));
  EXPECT_FALSE(contains(unit_ball(2, 1.0), v2(0.6, -0.5)));
}

TEST(Membership, SpectratopeAgainstEigenvalues) {
  RngStream rng(7, 0);
  Spectratope s;
  s.M = Mat::Identity(3, 3);
  std::vector<Mat> R;
  for (int i = 0; i < 3; ++i) {
    Mat G(2, 2);
    for (int k = 0; k < 4; ++k) G.data()[k] = rng.normal();
    R.push_back(G + G.transpose());
  }
  s.R.push_back(R);
  s.calR = MonotoneSet::unit_box(1);
  const SignalSet set(s);
  for (int k = 0; k < 20; ++k) {
    Vec y = rng.normal_vector(3);
    const Mat blk = s.block(0, y);
    const double lmax = oracle::lambda_max(blk * blk);
    // scale y onto either side of the boundary
    const Vec inside = y / std::sqrt(lmax) * 0.99;
    const Vec outside = y / std::sqrt(lmax) * 1.01;
    EXPECT_TRUE(contains(set, inside));
    EXPECT_FALSE(contains(set, outside));
  }
}

TEST(Emission, SupportViaProgramMatchesClosedForm) {
  Program prog;
  std::vector<Affine> x = emit_point(prog, unit_ball(3, 2.0));
  Vec d = (Vec(3) << 1, 2, 2).finished();
  prog.minimize(-conic::dot(d, x));
  conic::Solution sol = conic::solve(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(-sol.primal_objective, 3.0, 1e-6);
}

TEST(Emission, IntersectionSupport) {
  Intersection in{{unit_ball(2, 2.0), make_box(-0.5 * Vec::Ones(2), 0.5 * Vec::Ones(2))}};
  EXPECT_NEAR(support_function(in, v2(1, 1)), 1.0, 1e-6);
  EXPECT_NEAR(support_function(in, v2(1, 0)), 0.5, 1e-6);
}

TEST(SetForms, EllitopicFormOfL2Ball) {
  auto e = ellitopic_form(unit_ball(3, 2.0));
  ASSERT_TRUE(e.has_value());
  RngStream rng(8, 0);
  Vec d = rng.normal_vector(3);
  EXPECT_NEAR(support_function(*e, d), d.norm(), 1e-6);
  EXPECT_FALSE(ellitopic_form(unit_ball(3, 1.0)).has_value());
  EXPECT_FALSE(spectratopic_form(unit_ball(3, 1.5)).has_value());
}

TEST(SetForms, SpectratopicFormKeepsSupport) {
  RngStream rng(9, 0);
  for (const SignalSet& s : {unit_ball(3, 2.0), unit_ball(3, 4.0), make_box(-Vec::Ones(3), Vec::Ones(3))}) {
    auto sp = spectratopic_form(s);
    ASSERT_TRUE(sp.has_value());
    Vec d = rng.normal_vector(3);
    EXPECT_NEAR(support_function(*sp, d), support_function(s, d), 1e-5);
  }
}

TEST(SetValidation, RejectsBadMonotoneSets) {
  EXPECT_THROW(MonotoneSet::box(Vec::Zero(2)), std::invalid_argument);
  EXPECT_THROW(MonotoneSet::ball(Vec::Ones(2), 0.5), std::invalid_argument);
}
