#pragma once

#include "polyest/contrast.hpp"
#include "polyest/problem.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace polyest {

enum class EstimatorKind { Linear, PolyDesign1, PolyDesign2, IdentityContrast };

std::string estimator_name(EstimatorKind k);
// Throws std::invalid_argument for unknown names.
EstimatorKind parse_estimator(const std::string& name);

struct ResultRow {
  std::string scenario;
  std::string estimator;
  double sigma = 0.0;
  int trial = 0;
  double error = 0.0;
  double bound = 0.0;
  double seconds = 0.0;
};

// B_ij = delta^2 (i - j + 1) for j <= i; A = m rows of B drawn without replacement.
struct DoubleIntegrationSpec {
  int n = 64;
  int m = 32;
  double delta = 0.0;  // 0 selects 4/n
  std::vector<double> sigma_list{0.1, 0.01, 0.001, 0.0001};
  double eps = 0.1;
  int trials = 20;
  double r = 2.0;  // recovery norm l_r
};

// A = B = I_n, X = unit l1 ball, N(0, sigma^2 I) noise, squared l2 loss.
struct MotivatingSpec {
  int n = 100;
  double sigma = 0.1;
  int trials = 500;
};

// A = Diag(l^-alpha), B = Diag(l^-beta), X = {||Diag(l^delta) x||_rho <= 1}, l_r loss.
struct DiagonalSpec {
  int n = 256;
  double alpha = 0.0;
  double beta = 0.0;
  double delta_exp = 0.0;
  double rho = 2.0;
  double r = 2.0;
  std::vector<double> sigma{0.01};
  double eps = 0.1;
  int trials = 100;
};

struct InlineSpec {
  EstimationProblem problem;
  int trials = 20;
};

using ScenarioSpec = std::variant<DoubleIntegrationSpec, MotivatingSpec, DiagonalSpec, InlineSpec>;

struct ScenarioConfig {
  std::string id = "scenario";
  ScenarioSpec spec = DoubleIntegrationSpec{};
  std::vector<EstimatorKind> estimators;  // empty selects the scenario's defaults
  std::uint64_t seed = 1;
  std::string output;
  bool record_timing = false;  // seconds column stays 0 otherwise, keeping output byte-reproducible
  int jobs = 1;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, double>> summary;
};

struct DesignEntry {
  std::string estimator;
  double sigma = 0.0;
  Mat H;  // contrast (polyhedral) or weight matrix (linear, estimate H' omega)
  RiskCertificate certificate;
  double seconds = 0.0;
};

struct DesignReport {
  std::string scenario;
  std::vector<DesignEntry> entries;
  std::vector<std::pair<std::string, std::string>> metadata;
};

Mat double_integration_matrix(int n, double delta);
// m distinct indices of [0, n) in draw order (partial Fisher-Yates).
std::vector<int> sample_rows(int n, int m, std::uint64_t seed);

RunResult run_double_integration(const ScenarioConfig& config);
RunResult run_motivating(const ScenarioConfig& config);
RunResult run_diagonal(const ScenarioConfig& config);
RunResult run_inline(const ScenarioConfig& config);
RunResult run_scenario(const ScenarioConfig& config);

DesignReport design_scenario(const ScenarioConfig& config);

// argmin_h (1-h)^2 + sigma^2 n h^2 and its value.
std::pair<double, double> optimal_scalar_linear(int n, double sigma);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

}  // namespace polyest
