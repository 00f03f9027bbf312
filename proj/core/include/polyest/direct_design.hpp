#pragma once

#include "polyest/contrast.hpp"
#include "polyest/problem.hpp"

#include <optional>
#include <string>

namespace polyest {

struct ColumnDesign {
  double opt = 0.0;  // pi(g) + h_{Xs}(b - A'g) at the returned g
  Vec g;
  Vec h;             // g / pi(g), empty when the column is dropped
  bool dropped = false;
};

// min_g pi(g) + h_{Xs}(b - A'g).
ColumnDesign solve_saddle(const Mat& A, const SignalSet& Xs, const Vec& b, const TailNormContext& ctx);
ColumnDesign solve_saddle_column(const EstimationProblem& problem, int ell, const TailNormContext& ctx);

struct PsiResult {
  double value = 0.0;  // valid upper bound on Psi
  double lower = 0.0;  // value attained by a feasible v
  std::string regime;  // "r=inf", "rho=inf", "concave", "dp"
};

// Psi(s) = 2 max{ ||v ./ gamma||_r : ||v||_rho <= 1, 0 <= v <= gamma .* s }; gamma entries may be +inf.
PsiResult psi_bound_detail(const Vec& varsigma, const Vec& gamma, double rho, double r, int levels = 2000);
double psi_bound(const Vec& varsigma, const Vec& gamma, double rho, double r);

struct DirectDesignResult {
  ContrastMatrix H;
  Vec varsigma;
  PsiResult psi;
  Vec gamma;
  double rho = kInf;
};

// gamma_l = 1 / h_{Xs}(B_l), valid with rho = inf.
Vec auto_gamma(const EstimationProblem& problem);
DirectDesignResult build_contrast_direct(const EstimationProblem& problem, std::optional<Vec> gamma = std::nullopt,
                                         double rho = kInf);

struct DiagonalDesign {
  int frak_n = 0;
  double bound = 0.0;
  double theta = 0.0;
  Vec varsigma;
  Mat H;
};

DiagonalDesign diagonal_design(const Vec& a, const Vec& d, const Vec& b, double sigma, double eps, double rho, double r);

}  // namespace polyest
