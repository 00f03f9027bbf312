#pragma once

#include "polyest/contrast.hpp"
#include "polyest/problem.hpp"
#include "polyest/rng.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace polyest {

struct Recovery {
  Vec x_hat;
  Vec w_hat;
  double objective = 0.0;  // ||H'(omega - A x_hat)||_inf
};

// x_hat in argmin_{u in X} ||H'(omega - A u)||_inf, w_hat = B x_hat.
// With H empty every point of X is optimal and the solver's central point is returned.
Recovery polyhedral_estimate(const EstimationProblem& problem, const ContrastMatrix& H, const Vec& omega);

// Same program when H'A = Diag(d) and X is a Box or ScaledBall: min_{u in X} max_i |c_i - d_i u_i|, c = H'omega.
// w_hat is left empty.
Recovery polyhedral_estimate_diagonal(const SignalSet& X, const Vec& d, const Vec& c);

// max{B_l'x : x in Xs, ||H'A x||_inf <= 1} for every row l (upper bounds from the dual side of each solve).
Vec coordinate_widths(const EstimationProblem& problem, const ContrastMatrix& H);
// 2 max_l widths_l; the exact l_inf risk bound of H.
RiskCertificate risk_linf_exact(const EstimationProblem& problem, const ContrastMatrix& H);
// Psi(widths) for an l_r norm with gamma, rho (defaults: auto gamma, rho = inf).
RiskCertificate risk_bound_lr(const EstimationProblem& problem, const ContrastMatrix& H,
                              std::optional<Vec> gamma = std::nullopt, double rho = kInf);

struct LinearBaseline {
  Mat H;  // m x nu, estimate H' omega
  double opt_star = 0.0;
};

// Near-optimal linear estimate for spectratopic X and B*, sub-Gaussian noise.
LinearBaseline linear_design_baseline(const EstimationProblem& problem);

// Draws signals from X: 70% extreme points (enumerable vertices, else support maximizers),
// 20% support maximizers of random directions, 10% interior points.
class SignalSampler {
 public:
  explicit SignalSampler(SignalSet X);
  Vec sample(RngStream& rng) const;
  Vec vertex(RngStream& rng) const;
  Vec boundary(RngStream& rng) const;
  Vec interior(RngStream& rng) const;

 private:
  SignalSet X_;
  Vec lo_;
  Vec hi_;
};

// Index ceil((1 - eps)(T + 1)) of the sorted errors, capped at T.
double empirical_quantile(std::vector<double> errors, double eps);

struct EmpiricalRisk {
  double quantile = 0.0;
  std::vector<double> errors;
};

using EstimateFn = std::function<Vec(const Vec& omega)>;

// Trial k uses RngStream(seed, k); errors are ||Bx - estimate(omega)|| in the problem's norm.
EmpiricalRisk empirical_quantile_risk(const EstimationProblem& problem, const EstimateFn& estimate, int trials,
                                      std::uint64_t seed, int jobs = 1);

// Runs body(i) for i in [0, count) on up to jobs threads; exceptions are rethrown on the caller.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

}  // namespace polyest
