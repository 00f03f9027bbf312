#include "polyest/direct_design.hpp"
#include "polyest/estimator.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

using namespace polyest;

namespace {

EstimationProblem random_problem(int m, int n, RngStream& rng, const SignalSet& X, double sigma) {
  Mat A(m, n);
  for (int k = 0; k < m * n; ++k) A.data()[k] = rng.normal();
  return {A, Mat::Identity(n, n), X, NormSpec::lp(2.0), SubGaussian{sigma}, 0.1};
}

}  // namespace

TEST(Estimate, NoiselessObservationIsFit) {
  RngStream rng(81, 0);
  const SignalSet X = Intersection{{unit_ball(3, 2.0), make_box(-0.8 * Vec::Ones(3), 0.8 * Vec::Ones(3))}};
  EstimationProblem p = random_problem(4, 3, rng, X, 0.1);
  Mat H(4, 5);
  for (int k = 0; k < 20; ++k) H.data()[k] = rng.normal();
  ContrastMatrix c{H, Vec::Ones(5), 0.02, "test"};
  SignalSampler s(X);
  for (int k = 0; k < 10; ++k) {
    const Vec x = s.sample(rng);
    Recovery r = polyhedral_estimate(p, c, p.A * x);
    EXPECT_LE(r.objective, 1e-6);
    EXPECT_LE((H.transpose() * p.A * (r.x_hat - x)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_TRUE(contains(X, r.x_hat, 1e-6));
  }
}

TEST(Estimate, L1BallProjection) {
  EstimationProblem p{Mat::Identity(2, 2), Mat::Identity(2, 2), unit_ball(2, 1.0), NormSpec::lp(2.0), SubGaussian{0.1},
                      0.1};
  ContrastMatrix c{Mat::Identity(2, 2), Vec::Ones(2), 0.05, "test"};
  const Vec omega = Eigen::Vector2d(10.0, 0.0);
  Recovery r = polyhedral_estimate(p, c, omega);
  EXPECT_NEAR((r.x_hat - Eigen::Vector2d(1.0, 0.0)).norm(), 0.0, 1e-7);
  EXPECT_NEAR(r.objective, 9.0, 1e-7);
  // the generic conic path agrees with the diagonal shortcut
  ContrastMatrix dense{Mat::Identity(2, 2), Vec::Ones(2), 0.05, "test"};
  dense.H(0, 1) = 1e-30;
  Recovery g = polyhedral_estimate(p, dense, omega);
  EXPECT_NEAR(g.objective, 9.0, 1e-6);
}

TEST(Estimate, EmptyContrast) {
  EstimationProblem p{Mat::Identity(2, 2), Mat::Identity(2, 2), unit_ball(2, 2.0), NormSpec::lp(2.0), SubGaussian{0.1},
                      0.1};
  ContrastMatrix c{Mat(2, 0), Vec(0), 0.1, "empty"};
  Recovery r = polyhedral_estimate(p, c, Eigen::Vector2d(3.0, -1.0));
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_TRUE(contains(p.X, r.x_hat, 1e-6));
}

TEST(Estimate, DiagonalShortcutMatchesConic) {
  RngStream rng(82, 0);
  for (double p : {1.0, 2.0, 3.0, kInf}) {
    const int n = 4;
    Vec d(n), c(n), g(n);
    for (int i = 0; i < n; ++i) {
      d(i) = 0.3 + rng.uniform();
      c(i) = 3.0 * rng.normal();
      g(i) = 0.5 + rng.uniform();
    }
    const SignalSet X = ScaledBall{g, p};
    Recovery fast = polyhedral_estimate_diagonal(X, d, c);
    Program prog;
    std::vector<Affine> u = emit_point(prog, X);
    Affine s = prog.scalar();
    for (int i = 0; i < n; ++i) {
      prog.add_leq(Affine(c(i)) - d(i) * u[i], s);
      prog.add_leq(d(i) * u[i] - c(i), s);
    }
    prog.minimize(s);
    conic::Solution sol = conic::solve(prog);
    ASSERT_TRUE(sol.optimal()) << "p=" << p << " status " << conic::to_string(sol.status) << " gap " << sol.relative_gap
                               << " iters " << sol.iterations;
    EXPECT_NEAR(fast.objective, sol.value(s), 1e-6) << "p=" << p;
  }
}

TEST(Risk, ScalarLinfExact) {
  EstimationProblem p{Mat::Ones(1, 1), Mat::Ones(1, 1), make_box(-Vec::Ones(1), Vec::Ones(1)), NormSpec::lp(kInf),
                      SubGaussian{0.1}, 0.1};
  ContrastMatrix c{Mat::Constant(1, 1, 2.0), Vec::Ones(1), 0.1, "test"};
  EXPECT_NEAR(risk_linf_exact(p, c).bound, 1.0, 1e-7);
  EXPECT_THROW(risk_linf_exact({p.A, p.B, p.X, NormSpec::lp(2.0), p.scheme, 0.1}, c), std::invalid_argument);
}

TEST(LinearBaseline, ZeroB) {
  EstimationProblem p{Mat::Identity(3, 3), Mat::Zero(2, 3), unit_ball(3, 2.0), NormSpec::lp(2.0), SubGaussian{0.1}, 0.1};
  LinearBaseline l = linear_design_baseline(p);
  EXPECT_EQ(l.opt_star, 0.0);
  EXPECT_EQ(l.H.norm(), 0.0);
}

TEST(LinearBaseline, RejectsL1Ball) {
  EstimationProblem p{Mat::Identity(3, 3), Mat::Identity(3, 3), unit_ball(3, 1.0), NormSpec::lp(2.0), SubGaussian{0.1},
                      0.1};
  EXPECT_THROW(linear_design_baseline(p), std::invalid_argument);
}

TEST(LinearBaseline, ScalarClosedForm) {
  // here Opt* = min_h |1-h| + sigma |h| = sigma
  const double sigma = 0.3;
  EstimationProblem p{Mat::Ones(1, 1), Mat::Ones(1, 1), unit_ball(1, 2.0), NormSpec::lp(2.0), SubGaussian{sigma}, 0.1};
  LinearBaseline l = linear_design_baseline(p);
  const double h = l.H(0, 0);
  const double risk = std::sqrt((1 - h) * (1 - h) + sigma * sigma * h * h);
  EXPECT_NEAR(l.opt_star, sigma, 1e-6);
  EXPECT_GE(l.opt_star, risk - 1e-6);
}

TEST(Quantile, UpperOrderStatistic) {
  std::vector<double> e;
  for (int i = 1; i <= 10; ++i) e.push_back(0.1 * i);
  EXPECT_DOUBLE_EQ(empirical_quantile(e, 0.1), 1.0);
  std::vector<double> big;
  for (int i = 1; i <= 99; ++i) big.push_back(i);
  EXPECT_DOUBLE_EQ(empirical_quantile(big, 0.1), 90.0);
}

TEST(Quantile, ZeroNoiseExactRecovery) {
  const int n = 3;
  EstimationProblem p{Mat::Identity(n, n), Mat::Identity(n, n), unit_ball(n, 1.0), NormSpec::lp(2.0), SubGaussian{0.0},
                      0.1};
  ContrastMatrix c{Mat::Identity(n, n), Vec::Ones(n), 0.1, "test"};
  EmpiricalRisk r = empirical_quantile_risk(p, [&](const Vec& w) { return polyhedral_estimate(p, c, w).w_hat; }, 30, 5);
  for (double e : r.errors) EXPECT_LE(e, 1e-6);
}

TEST(Quantile, ParallelMatchesSerial) {
  EstimationProblem p{Mat::Identity(2, 2), Mat::Identity(2, 2), unit_ball(2, 2.0), NormSpec::lp(2.0), SubGaussian{0.2},
                      0.1};
  auto est = [](const Vec& w) { return Vec(0.5 * w); };
  EmpiricalRisk a = empirical_quantile_risk(p, est, 40, 9, 1);
  EmpiricalRisk b = empirical_quantile_risk(p, est, 40, 9, 4);
  EXPECT_EQ(a.errors, b.errors);
}

TEST(Sampler, PointsStayInSet) {
  RngStream rng(83, 0);
  Simplex sx;
  sx.n = 3;
  sx.C = Mat(0, 3);
  sx.d = Vec(0);
  for (const SignalSet& X : {unit_ball(3, 1.0), unit_ball(3, 3.0), make_box(Vec::Zero(3), Vec::Ones(3)), SignalSet(sx),
                             unit_disk_ellitope(3)}) {
    SignalSampler s(X);
    for (int k = 0; k < 40; ++k) EXPECT_TRUE(contains(X, s.sample(rng), 1e-6)) << X.kind_name();
  }
}

TEST(ParallelFor, RethrowsAndCoversRange) {
  std::atomic<int> sum{0};
  parallel_for(100, 3, [&](int i) { sum += i; });
  EXPECT_EQ(sum.load(), 4950);
  EXPECT_THROW(parallel_for(10, 3, [](int i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
