#include "polyest/config_io.hpp"
#include "polyest/experiments.hpp"

#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

using namespace polyest;

namespace {

double summary(const RunResult& r, const std::string& key) {
  for (const auto& [k, v] : r.summary) {
    if (k == key) return v;
  }
  ADD_FAILURE() << "missing summary key " << key;
  return std::nan("");
}

ScenarioConfig small_double_integration(std::vector<double> sigmas, int trials) {
  ScenarioConfig c;
  c.id = "di-small";
  DoubleIntegrationSpec s;
  s.n = 8;
  s.m = 4;
  s.sigma_list = std::move(sigmas);
  s.trials = trials;
  c.spec = s;
  c.estimators = {EstimatorKind::PolyDesign1, EstimatorKind::IdentityContrast};
  c.seed = 17;
  return c;
}

std::string csv(const RunResult& r) {
  std::ostringstream os;
  write_csv(os, r.rows);
  return os.str();
}

}  // namespace

TEST(DoubleIntegration, MatrixEntries) {
  const Mat B = double_integration_matrix(4, 0.5);
  EXPECT_DOUBLE_EQ(B(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(B(3, 0), 0.25 * 4);
  EXPECT_DOUBLE_EQ(B(2, 1), 0.25 * 2);
  EXPECT_DOUBLE_EQ(B(1, 2), 0.0);
}

TEST(DoubleIntegration, RowsDrawnWithoutReplacement) {
  const std::vector<int> r = sample_rows(64, 32, 5);
  EXPECT_EQ(std::set<int>(r.begin(), r.end()).size(), 32u);
  EXPECT_EQ(r, sample_rows(64, 32, 5));
  EXPECT_NE(r, sample_rows(64, 32, 6));
  for (int i : r) EXPECT_TRUE(i >= 0 && i < 64);
  EXPECT_THROW(sample_rows(4, 5, 1), std::invalid_argument);
}

TEST(DoubleIntegration, RowCountAndLayout) {
  RunResult r = run_double_integration(small_double_integration({0.1, 0.01, 0.001, 0.0001}, 3));
  EXPECT_EQ(r.rows.size(), 4u * 3u * 2u);
  const std::string text = csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), "scenario,estimator,sigma,trial,error,bound,seconds");
  for (const ResultRow& row : r.rows) {
    EXPECT_GE(row.error, 0.0);
    EXPECT_GT(row.bound, 0.0);
    EXPECT_EQ(row.seconds, 0.0);
  }
}

TEST(DoubleIntegration, ZeroNoiseFullObservationRecovers) {
  ScenarioConfig c = small_double_integration({0.0}, 1);
  std::get<DoubleIntegrationSpec>(c.spec).m = 8;
  c.estimators = {EstimatorKind::PolyDesign1};
  RunResult r = run_double_integration(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_LE(r.rows[0].error, 1e-5);
}

TEST(DoubleIntegration, Reproducible) {
  ScenarioConfig c = small_double_integration({0.05}, 4);
  c.jobs = 2;
  const std::string a = csv(run_double_integration(c));
  c.jobs = 1;
  const std::string b = csv(run_double_integration(c));
  EXPECT_EQ(a, b);
}

TEST(DoubleIntegration, ViolationsWithinBinomialSlack) {
  RunResult r = run_double_integration(small_double_integration({0.05}, 40));
  const double limit = 0.1 * 40 + 3.0 * std::sqrt(0.1 * 40);
  EXPECT_LE(summary(r, "violations:poly_design1@0.05"), limit);
  EXPECT_LE(summary(r, "violations:identity_contrast@0.05"), limit);
}

TEST(Motivating, ScalarLinearRisk) {
  auto [h, risk] = optimal_scalar_linear(100, 0.1);
  EXPECT_NEAR(risk, 0.5, 1e-9);
  EXPECT_NEAR(h, 0.5, 1e-6);
}

TEST(Motivating, EmpiricalLinearMse) {
  ScenarioConfig c;
  c.id = "mot";
  c.spec = MotivatingSpec{100, 0.1, 10000};
  c.seed = 3;
  RunResult r = run_motivating(c);
  EXPECT_NEAR(summary(r, "mse:linear"), 0.5, 0.05);
  EXPECT_LE(summary(r, "mse:identity_contrast"), summary(r, "poly_risk_reference"));
}

TEST(Motivating, RejectsLargeSigma) {
  ScenarioConfig c;
  c.spec = MotivatingSpec{2, 10.0, 5};
  EXPECT_THROW(run_motivating(c), std::invalid_argument);
}

TEST(Diagonal, QuantileBelowBoundAndSlope) {
  ScenarioConfig c;
  c.id = "diag";
  DiagonalSpec s;
  s.n = 2048;
  s.alpha = 0.5;
  s.beta = 0.75;
  s.delta_exp = 0.5;
  s.rho = 2.0;
  s.r = 2.0;
  s.sigma = {1e-3, 1e-4, 1e-5, 1e-6};
  s.trials = 50;
  c.spec = s;
  RunResult r = run_diagonal(c);
  for (double sigma : s.sigma) {
    char buf[32];
    const std::string key(buf, std::to_chars(buf, buf + sizeof buf, sigma).ptr);
    EXPECT_LE(summary(r, "quantile@" + key), summary(r, "bound@" + key));
  }
  EXPECT_NEAR(summary(r, "slope"), summary(r, "slope_expected"), 0.1);
}

TEST(Diagonal, RejectsBadExponents) {
  ScenarioConfig c;
  DiagonalSpec s;
  s.rho = 3.0;
  s.r = 2.0;
  c.spec = s;
  EXPECT_THROW(run_diagonal(c), std::invalid_argument);
}

TEST(Slope, PowerLaw) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.75));
  EXPECT_NEAR(loglog_slope(x, y), 0.75, 1e-12);
}

TEST(Config, ParsesDoubleIntegration) {
  ScenarioConfig c = parse_config(R"({"id":"a","seed":4,"estimators":["linear","poly_design2"],
    "problem":{"generator":"double_integration","n":16,"m":8,"sigma_list":[0.1],"trials":2}})");
  EXPECT_EQ(c.id, "a");
  EXPECT_EQ(c.seed, 4u);
  ASSERT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(c.estimators[1], EstimatorKind::PolyDesign2);
  const auto& s = std::get<DoubleIntegrationSpec>(c.spec);
  EXPECT_EQ(s.n, 16);
  EXPECT_EQ(s.trials, 2);
}

TEST(Config, ParsesInlineProblem) {
  ScenarioConfig c = parse_config(R"({"id":"b","problem":{"A":[[1,0],[0,1]],"B":[[1,1]],
    "X":{"type":"ball","p":2,"n":2},"norm":"inf","scheme":{"type":"gaussian","sigma":0.1},"eps":0.05,"trials":3}})");
  const auto& s = std::get<InlineSpec>(c.spec);
  EXPECT_EQ(s.problem.nu(), 1);
  EXPECT_EQ(s.problem.eps, 0.05);
  EXPECT_TRUE(std::isinf(s.problem.norm.r()));
}

TEST(Config, RejectsMalformedInput) {
  for (const char* bad : {
           R"({"id":"x","problem":{"generator":"motivating","n":10,"sigma":0.1,"trials":5},"bogus":1})",
           R"({"id":"x","problem":{"generator":"motivating","n":"ten","sigma":0.1,"trials":5}})",
           R"({"id":"x","problem":{"generator":"nope"}})",
           R"({"id":"x,y","problem":{"generator":"motivating","n":10,"sigma":0.1,"trials":5}})",
           R"({"id":"x","estimators":["ridge"],"problem":{"generator":"motivating","n":10,"sigma":0.1,"trials":5}})",
           R"({"id":"x","problem":{"generator":"double_integration","eps":1.5}})",
           R"({"id": )",
       }) {
    EXPECT_THROW(parse_config(bad), std::invalid_argument) << bad;
  }
}

TEST(Config, SignalSets) {
  SignalSet s = parse_signal_set(R"({"type":"intersection","parts":[{"type":"ball","p":2,"n":3},
    {"type":"box","n":3,"radius":0.5}]})");
  EXPECT_EQ(s.dim(), 3);
  EXPECT_NEAR(support_function(s, Vec::Unit(3, 0)), 0.5, 1e-6);
  EXPECT_THROW(parse_signal_set(R"({"type":"ball","p":0.5,"n":3})"), std::invalid_argument);
}

TEST(Output, JsonMirror) {
  RunResult r = run_double_integration(small_double_integration({0.1}, 1));
  std::ostringstream os;
  write_json(os, r);
  const std::string text = os.str();
  EXPECT_NE(text.find("\"rows\""), std::string::npos);
  EXPECT_NE(text.find("\"poly_design1\""), std::string::npos);
}
