#include "polyest/sdp_design.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polyest {

namespace {

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

double min_eig(const Mat& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Mat clip_psd(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(M));
  Vec e = es.eigenvalues().cwiseMax(0.0);
  return sym(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose());
}

bool acceptable(const conic::Solution& sol) {
  return sol.optimal() || (sol.status == conic::Status::MaxIterations && sol.relative_gap < 1e-6);
}

// Variable matrix in the cone: the majorant when the cone has one, else a member variable.
std::pair<MatAffine, Affine> cone_variable(Program& prog, const CompatCone& cone) {
  if (std::optional<Majorant> m = cone.majorant(prog)) return {m->V, m->tau};
  MatAffine V = prog.symmetric(cone.dim());
  Affine t = prog.scalar();
  cone.emit(prog, V, t);
  return {V, t};
}

}  // namespace

HCone::HCone(ZSet z) : z_(std::move(z)) {
  const double m = z_.m();
  if (!z_.is_singleton()) kappa_ = 6.0 * std::log(2.0 * std::sqrt(3.0) * m * m);
}

void HCone::emit(Program& prog, const MatAffine& Theta, const Affine& mu) const {
  if (Theta.rows() != m()) throw std::invalid_argument("H cone: dimension mismatch");
  prog.add_psd(Theta);
  if (singleton()) {
    z_.emit_phi_leq(prog, Theta.diagonal(), mu);
  } else {
    z_.emit_phi_leq(prog, Theta.diagonal(), (1.0 / kappa_) * mu);
  }
}

double HCone::mu_min(const Mat& Theta) const {
  if (Theta.rows() != m()) throw std::invalid_argument("H cone: dimension mismatch");
  Vec d = Theta.diagonal().cwiseMax(0.0);
  return kappa_ * z_.phi(d);
}

bool HCone::contains(const Mat& Theta, double mu, double tol) const {
  const double scale = std::max(1.0, Theta.cwiseAbs().maxCoeff());
  if (min_eig(Theta) < -tol * scale) return false;
  return mu >= mu_min(Theta) - tol * std::max(1.0, std::abs(mu));
}

HCone build_h_cone(const ZSet& z, int m) {
  if (z.m() != m) throw std::invalid_argument("build_h_cone: Z-set dimension differs from m");
  return HCone(z);
}

Mat dct_matrix(int m) {
  if (m <= 0) throw std::invalid_argument("dct_matrix: m must be positive");
  Mat V(m, m);
  for (int k = 0; k < m; ++k) {
    const double c = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
    for (int j = 0; j < m; ++j) V(k, j) = c * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * m));
  }
  const double orth = (V * V.transpose() - Mat::Identity(m, m)).cwiseAbs().maxCoeff();
  if (orth > 1e-12 || V.cwiseAbs().maxCoeff() > std::sqrt(2.0 / m) + 1e-15) {
    throw std::logic_error("dct_matrix: orthogonality or entry bound check failed");
  }
  return V;
}

Mat signed_contrast(const Mat& Q, double mu, const Vec& chi, const Mat& V) {
  return std::sqrt(Q.rows() / mu) * Q * chi.asDiagonal() * V;
}

bool columns_within_unit(const Mat& H, const HCone& hcone, double tol) {
  for (int j = 0; j < H.cols(); ++j) {
    if (hcone.pi(H.col(j)) > 1.0 + tol) return false;
  }
  return true;
}

Mat psd_factor(const Mat& Theta) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(Theta));
  Vec e = es.eigenvalues();
  const double scale = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
  if (e(0) < -1e-10 * scale) throw std::invalid_argument("Theta is not positive semidefinite");
  e = e.cwiseMax(0.0);
  return es.eigenvectors() * e.cwiseSqrt().asDiagonal();
}

ContrastWeights theta_to_contrast(const Mat& Theta, double mu, const HCone& hcone, RngStream& rng) {
  const int m = hcone.m();
  if (Theta.rows() != m || Theta.cols() != m) throw std::invalid_argument("theta_to_contrast: dimension mismatch");
  if (!hcone.contains(Theta, mu, 1e-8)) throw std::invalid_argument("theta_to_contrast: (Theta, mu) is not in H");
  ContrastWeights out;
  if (mu <= 0.0 || Theta.cwiseAbs().maxCoeff() == 0.0) {
    out.H = Mat::Zero(m, m);
    out.lambda = Vec::Zero(m);
    return out;
  }
  if (hcone.singleton()) {
    Vec s = hcone.z().zbar().cwiseSqrt();
    if (s.minCoeff() <= 0.0) throw std::invalid_argument("theta_to_contrast: Z point must be positive");
    Mat sts = s.asDiagonal() * sym(Theta) * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(sts);
    out.lambda = es.eigenvalues().cwiseMax(0.0);
    out.H = s.cwiseInverse().asDiagonal() * es.eigenvectors();
    return out;
  }
  const Mat Q = psd_factor(Theta);
  const Mat V = dct_matrix(m);
  out.lambda = Vec::Constant(m, mu / m);
  constexpr int kMaxDraws = 64;
  for (int k = 0; k < kMaxDraws; ++k) {
    Vec chi(m);
    for (int i = 0; i < m; ++i) chi(i) = rng.rademacher();
    Mat H = signed_contrast(Q, mu, chi, V);
    ++out.draws;
    if (columns_within_unit(H, hcone)) {
      out.H = std::move(H);
      return out;
    }
  }
  throw std::runtime_error("theta_to_contrast: no admissible sign vector in 64 draws");
}

SdpDesignResult solve_design_sdp(const EstimationProblem& problem, const CompatCone& X_cone,
                                 const CompatCone& U_cone, const HCone& h_cone, RngStream& rng) {
  const int m = problem.m();
  const int n = problem.n();
  const int nu = problem.nu();
  if (X_cone.dim() != n) throw std::invalid_argument("solve_design_sdp: X cone dimension differs from n");
  if (U_cone.dim() != nu) throw std::invalid_argument("solve_design_sdp: U cone dimension differs from nu");
  if (h_cone.m() != m) throw std::invalid_argument("solve_design_sdp: H cone dimension differs from m");

  TailNormContext ctx = problem.tail_context(problem.eps / m);
  SdpDesignResult out;
  if (problem.B.cwiseAbs().maxCoeff() == 0.0) {
    out.Theta = Mat::Zero(m, m);
    out.X = Mat::Zero(n, n);
    out.U = Mat::Zero(nu, nu);
    out.lambda = Vec::Zero(m);
    out.H = ContrastMatrix::from_columns(Mat::Zero(m, m), ctx, "design-II");
    return out;
  }

  const double scale = h_cone.mu_min(Mat::Identity(m, m)) / m;
  if (!(scale > 0.0)) throw std::invalid_argument("solve_design_sdp: degenerate H cone");
  Program prog;
  MatAffine Theta = prog.symmetric_scaled(m, 1.0 / scale);
  Affine mu = prog.scalar();
  h_cone.emit(prog, Theta, mu);
  auto [X, t] = cone_variable(prog, X_cone);
  auto [U, s] = cone_variable(prog, U_cone);
  MatAffine half_b(Mat(0.5 * problem.B));
  MatAffine block = MatAffine::blocks({{U, half_b}, {half_b.transpose(), congruence(problem.A, Theta) + X}});
  prog.add_psd(block);
  prog.minimize(2.0 * (t + s + mu));

  conic::Solution sol = conic::solve(prog);
  if (!acceptable(sol)) throw std::runtime_error("design SDP: solver returned " + conic::to_string(sol.status));
  out.solver_opt = sol.primal_objective;
  out.iterations = sol.iterations;

  // Repair to an exactly feasible point, then re-price every term.
  out.Theta = clip_psd(sol.value(Theta));
  out.mu = h_cone.mu_min(out.Theta);
  Mat Xv = sym(sol.value(X));
  Mat Uv = sym(sol.value(U));
  Mat K(nu + n, nu + n);
  K << Uv, 0.5 * problem.B, 0.5 * problem.B.transpose(), problem.A.transpose() * out.Theta * problem.A + Xv;
  const double kscale = std::max(1.0, K.cwiseAbs().maxCoeff());
  double eta = std::max(0.0, -min_eig(K));
  if (eta > 0.0) eta += 1e-13 * kscale;
  Xv += eta * Mat::Identity(n, n);
  Uv += eta * Mat::Identity(nu, nu);
  for (Mat* P : {&Xv, &Uv}) {
    double lo = min_eig(*P);
    if (lo < 0.0) *P += (-lo + 1e-13 * kscale) * Mat::Identity(P->rows(), P->rows());
  }
  out.X = Xv;
  out.U = Uv;
  out.t = X_cone.min_tau(Xv);
  out.s = U_cone.min_tau(Uv);
  if (!std::isfinite(out.t) || !std::isfinite(out.s)) throw std::runtime_error("design SDP: repaired point left the cones");
  out.opt = 2.0 * (out.t + out.s + out.mu);

  ContrastWeights cw = theta_to_contrast(out.Theta, out.mu, h_cone, rng);
  out.lambda = cw.lambda;
  out.draws = cw.draws;
  out.H = ContrastMatrix::from_columns(std::move(cw.H), ctx, "design-II");
  return out;
}

double mfunc_value(const Mat& M, const CompatCone& X_cone, const CompatCone& U_cone) {
  const int nu = U_cone.dim();
  const int n = X_cone.dim();
  if (M.rows() != nu + n || M.cols() != nu + n) throw std::invalid_argument("mfunc_value: dimension mismatch");
  if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Program prog;
  auto [X, t] = cone_variable(prog, X_cone);
  auto [U, s] = cone_variable(prog, U_cone);
  prog.add_psd(MatAffine::block_diag({U, X}) - MatAffine(sym(M)));
  prog.minimize(t + s);
  conic::Solution sol = conic::solve(prog);
  if (!acceptable(sol)) throw std::runtime_error("mfunc_value: solver returned " + conic::to_string(sol.status));
  return sol.primal_objective;
}

AggregatedContrast aggregate_contrasts(const std::vector<ContrastMatrix>& designs, double eps,
                                       const TailNormContext& ctx) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("aggregate_contrasts: eps must lie in (0,1)");
  int N = 0;
  for (const ContrastMatrix& d : designs) {
    if (d.rows() != ctx.m()) throw std::invalid_argument("aggregate_contrasts: row count mismatch");
    N += d.cols();
  }
  AggregatedContrast out;
  out.theta = Vec::Ones(static_cast<int>(designs.size()));
  const TailNormContext full = ctx.with_delta(eps / std::max(1, N));
  const double L = std::log(2.0 / full.delta());
  Mat H(ctx.m(), N);
  int col = 0;
  for (std::size_t k = 0; k < designs.size(); ++k) {
    const ContrastMatrix& d = designs[k];
    const double Lk = std::log(2.0 / (d.delta > 0.0 ? d.delta : eps / std::max(1, d.cols())));
    // pi_delta scales as sqrt(ln(2/delta)) for sub-Gaussian noise; for the Bernstein-type norms the
    // ratio of the two delta-dependent parts is bounded below by ln(2/delta_k)/ln(2/delta).
    const double r = std::min(1.0, Lk / L);
    out.theta(static_cast<int>(k)) = std::holds_alternative<SubGaussian>(ctx.scheme()) ? std::sqrt(r) : r;
    for (int j = 0; j < d.cols(); ++j, ++col) {
      Vec h = d.H.col(j);
      const double p = full.pi(h);
      H.col(col) = p > 0.0 ? Vec(h / p) : h;
    }
  }
  out.H = ContrastMatrix::from_columns(std::move(H), full, "aggregated");
  return out;
}

}  // namespace polyest
