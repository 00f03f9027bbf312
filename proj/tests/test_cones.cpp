#include "oracles.hpp"
#include "polyest/cones.hpp"
#include "polyest/estimator.hpp"
#include "polyest/rng.hpp"

#include <gtest/gtest.h>

using namespace polyest;

namespace {

Mat random_psd(int n, RngStream& rng) {
  Mat G(n, n);
  for (int k = 0; k < n * n; ++k) G.data()[k] = rng.normal();
  return G * G.transpose() / n;
}

// max over sampled points of y'Vy / tau
double fuzz_ratio(const CompatCone& cone, const SignalSet& set, int members, int points, std::uint64_t seed) {
  RngStream rng(seed, 0);
  SignalSampler sampler(set);
  std::vector<Vec> ys;
  for (int k = 0; k < points; ++k) ys.push_back(sampler.sample(rng));
  double worst = 0.0;
  for (int k = 0; k < members; ++k) {
    const Mat V = random_psd(cone.dim(), rng);
    const double tau = cone.min_tau(V);
    for (const Vec& y : ys) worst = std::max(worst, y.dot(V * y) / tau);
  }
  return worst;
}

}  // namespace

TEST(SpectratopeCone, BoxMembers) {
  const int n = 3;
  Spectratope box = *box_as_spectratope(n).as<Spectratope>();
  ConePtr c = spectratope_cone(box);
  EXPECT_TRUE(c->contains(Mat::Identity(n, n), n));
  EXPECT_TRUE(c->contains(Mat::Zero(n, n), 0.0));
  EXPECT_LE(fuzz_ratio(*c, box, 10, 50, 41), 1.0 + 1e-6);
}

TEST(EllitopeCone, L2BallIsSpectralNorm) {
  ConePtr c = ellitope_cone(*ellitopic_form(unit_ball(3, 2.0)));
  RngStream rng(42, 0);
  for (int k = 0; k < 10; ++k) {
    const Mat V = random_psd(3, rng);
    EXPECT_NEAR(c->min_tau(V), oracle::lambda_max(V), 1e-6);
  }
  EXPECT_TRUE(c->contains(Mat::Zero(3, 3), 0.0));
}

TEST(AbsNormCone, S1ClosedForm) {
  ConePtr c = absolute_norm_cone(2, 1.0);
  EXPECT_TRUE(c->contains(Mat::Identity(2, 2), 1.0));
  EXPECT_FALSE(c->contains(Mat::Identity(2, 2), 0.9));
}

TEST(AbsNormCone, S2SpectralNorm) {
  ConePtr c = absolute_norm_cone(2, 2.0);
  const Mat V = Eigen::Vector2d(1, 3).asDiagonal();
  EXPECT_TRUE(c->contains(V, 3.0));
  EXPECT_FALSE(c->contains(V, 2.9));
}

TEST(AbsNormCone, S4IdentityNeedsSqrt2) {
  EXPECT_NEAR(absolute_norm_cone(2, 4.0)->min_tau(Mat::Identity(2, 2)), std::sqrt(2.0), 1e-6);
}

TEST(AbsNormCone, GeneralAndDiagonalFormsAgree) {
  RngStream rng(43, 0);
  for (double s : {2.0, 3.0, 4.0, kInf}) {
    ConePtr g = absolute_norm_cone(6, s, std::nullopt, AbsNormForm::General);
    ConePtr d = absolute_norm_cone(6, s, std::nullopt, AbsNormForm::Diagonal);
    for (int k = 0; k < 5; ++k) {
      const Mat V = random_psd(6, rng);
      const double tg = g->min_tau(V), td = d->min_tau(V);
      EXPECT_NEAR(tg, td, 1e-5 * td) << "s=" << s;
    }
  }
}

TEST(AbsNormCone, EllitopeFormAgrees) {
  RngStream rng(44, 0);
  for (double s : {2.0, 4.0, kInf}) {
    ConePtr a = absolute_norm_cone(6, s);
    ConePtr e = ellitope_cone(*ellitopic_form(unit_ball(6, s)));
    for (int k = 0; k < 5; ++k) {
      const Mat V = random_psd(6, rng);
      EXPECT_NEAR(a->min_tau(V), e->min_tau(V), 1e-5 * a->min_tau(V)) << "s=" << s;
    }
  }
}

TEST(Calculus, ProductOfMembers) {
  ConePtr p2 = absolute_norm_cone(2, 2.0);
  ConePtr p3 = absolute_norm_cone(3, 2.0);
  ConePtr prod = product_cone({p2, p3});
  RngStream rng(45, 0);
  const Mat V1 = random_psd(2, rng), V2 = random_psd(3, rng);
  Mat V = Mat::Zero(5, 5);
  V.topLeftCorner(2, 2) = V1;
  V.bottomRightCorner(3, 3) = V2;
  EXPECT_TRUE(prod->contains(V, p2->min_tau(V1) + p3->min_tau(V2) + 1e-7));
}

TEST(Calculus, LinearImageFuzz) {
  RngStream rng(46, 0);
  Mat M(3, 2);
  for (int k = 0; k < 6; ++k) M.data()[k] = rng.normal();
  ConePtr c = linear_image_cone(absolute_norm_cone(2, 2.0), M);
  const SignalSet image = LinearImage{M, unit_ball(2, 2.0)};
  EXPECT_LE(fuzz_ratio(*c, image, 10, 60, 47), 1.0 + 1e-6);
}

TEST(Calculus, IntersectionIsAtLeastAsPermissive) {
  ConePtr a = compatible_cone(make_box(-Vec::Ones(3), Vec::Ones(3)));
  ConePtr b = compatible_cone(make_box(-0.5 * Vec::Ones(3), 0.5 * Vec::Ones(3)));
  ConePtr both = intersection_cone({a, b});
  RngStream rng(48, 0);
  for (int k = 0; k < 5; ++k) {
    const Mat V = random_psd(3, rng);
    EXPECT_LE(both->min_tau(V), std::min(a->min_tau(V), b->min_tau(V)) * (1 + 1e-6));
  }
}

TEST(Widen, ScalesByFour) {
  ConePtr base = absolute_norm_cone(3, 2.0);
  ConePtr w = widen_cone(base);
  ConePtr ww = widen_cone(w);
  RngStream rng(49, 0);
  const Mat V = random_psd(3, rng);
  EXPECT_NEAR(w->min_tau(V), 4.0 * base->min_tau(V), 1e-6);
  EXPECT_NEAR(ww->min_tau(V), 16.0 * base->min_tau(V), 1e-5);
}

TEST(Widen, ShiftedBoxDifferences) {
  const SignalSet shifted = make_box(Vec::Zero(3), Vec::Ones(3));
  ConePtr w = widen_cone(compatible_cone(symmetrize(shifted)));
  RngStream rng(50, 0);
  SignalSampler s(shifted);
  for (int k = 0; k < 10; ++k) {
    const Mat V = random_psd(3, rng);
    const double tau = w->min_tau(V);
    for (int j = 0; j < 30; ++j) {
      const Vec y = s.sample(rng) - s.sample(rng);
      EXPECT_LE(y.dot(V * y), tau * (1 + 1e-6));
    }
  }
}

TEST(Cones, ClosedUnderScalingAndAddition) {
  ConePtr c = spectratope_cone(*box_as_spectratope(3).as<Spectratope>());
  RngStream rng(51, 0);
  const Mat V1 = random_psd(3, rng), V2 = random_psd(3, rng);
  const double t1 = c->min_tau(V1), t2 = c->min_tau(V2);
  EXPECT_TRUE(c->contains(2.5 * V1, 2.5 * t1 + 1e-6));
  EXPECT_TRUE(c->contains(V1 + V2, t1 + t2 + 1e-6));
}

TEST(Lifting, L2BallSpectratopeMatchesEllitope) {
  RngStream rng(52, 0);
  const Mat C = random_psd(4, rng);
  auto bound = [&](const SignalSet& s) {
    Program prog;
    auto lift = emit_quadratic_lifting(prog, s);
    EXPECT_TRUE(lift.has_value());
    // max_{y in set} y'Cy <= t whenever S >= M'CM
    prog.add_psd(lift->S - MatAffine(lift->M.transpose() * C * lift->M));
    prog.minimize(lift->t);
    conic::Solution sol = conic::solve(prog);
    EXPECT_TRUE(sol.optimal());
    return sol.value(lift->t);
  };
  const double direct = bound(unit_ball(4, 2.0));
  EXPECT_NEAR(direct, oracle::lambda_max(C), 1e-6);
  EXPECT_NEAR(bound(*spectratopic_form(unit_ball(4, 2.0))), direct, 1e-5);
  Program scratch;
  EXPECT_FALSE(emit_quadratic_lifting(scratch, unit_ball(4, 1.0)).has_value());
}
