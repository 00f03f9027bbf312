#pragma once

#include "polyest/cones.hpp"
#include "polyest/contrast.hpp"
#include "polyest/problem.hpp"
#include "polyest/rng.hpp"

#include <string>
#include <vector>

namespace polyest {

// H = {(Theta, mu): Theta >= 0, mu >= sum_i zbar_i Theta_ii} for a singleton Z,
// otherwise {Theta >= 0, mu >= kappa phi(diag Theta)} with kappa = 6 ln(2 sqrt(3) m^2).
class HCone {
 public:
  explicit HCone(ZSet z);

  const ZSet& z() const { return z_; }
  bool singleton() const { return z_.is_singleton(); }
  int m() const { return z_.m(); }
  double kappa() const { return kappa_; }

  void emit(Program& prog, const MatAffine& Theta, const Affine& mu) const;
  double mu_min(const Mat& Theta) const;
  bool contains(const Mat& Theta, double mu, double tol = 1e-8) const;
  // Assumption-D norm of a contrast column.
  double pi(const Vec& h) const { return z_.pi(h); }

 private:
  ZSet z_;
  double kappa_ = 1.0;
};

HCone build_h_cone(const ZSet& z, int m);

struct ContrastWeights {
  Mat H;
  Vec lambda;
  int draws = 0;  // sign vectors tried (general case)
};

// Orthogonal DCT-II matrix, V_kj = c_k cos(pi (2j+1) k / (2m)); entries bounded by sqrt(2/m).
Mat dct_matrix(int m);
// sqrt(m/mu) Q Diag(chi) V
Mat signed_contrast(const Mat& Q, double mu, const Vec& chi, const Mat& V);
bool columns_within_unit(const Mat& H, const HCone& hcone, double tol = 1e-10);
// Theta = Q Q' with negative eigenvalues down to -1e-10 ||Theta|| clipped; larger negativity throws.
Mat psd_factor(const Mat& Theta);

ContrastWeights theta_to_contrast(const Mat& Theta, double mu, const HCone& hcone, RngStream& rng);

struct SdpDesignResult {
  Mat Theta;
  double mu = 0.0;
  double t = 0.0;
  double s = 0.0;
  Mat X;
  Mat U;
  double opt = 0.0;         // 2(t + s + mu) at the repaired solution
  double solver_opt = 0.0;  // objective reported by the solver
  ContrastMatrix H;
  Vec lambda;
  int iterations = 0;
  int draws = 0;
};

// min 2(t+s+mu) s.t. [[U, B/2], [B'/2, A'Theta A + X]] >= 0, (X,t) in X_cone, (U,s) in U_cone, (Theta,mu) in H.
SdpDesignResult solve_design_sdp(const EstimationProblem& problem, const CompatCone& X_cone,
                                 const CompatCone& U_cone, const HCone& h_cone, RngStream& rng);

// inf{t + s : (X,t) in X_cone, (U,s) in U_cone, Diag(U, X) >= M}
double mfunc_value(const Mat& M, const CompatCone& X_cone, const CompatCone& U_cone);

struct AggregatedContrast {
  ContrastMatrix H;
  Vec theta;  // per-design factors theta_k
};

// Stacks designs with delta_k = eps/N_k into one contrast with pi_{eps/N}-unit columns, N = sum N_k.
AggregatedContrast aggregate_contrasts(const std::vector<ContrastMatrix>& designs, double eps,
                                       const TailNormContext& ctx);

}  // namespace polyest
