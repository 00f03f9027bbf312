#include "polyest/estimator.hpp"

#include "polyest/cones.hpp"
#include "polyest/direct_design.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace polyest {

namespace {

bool acceptable(const conic::Solution& sol) {
  return sol.optimal() || (sol.status == conic::Status::MaxIterations && sol.relative_gap < 1e-6);
}

bool exactly_diagonal(const Mat& M) {
  if (M.rows() != M.cols()) return false;
  for (int j = 0; j < M.cols(); ++j) {
    for (int i = 0; i < M.rows(); ++i) {
      if (i != j && M(i, j) != 0.0) return false;
    }
  }
  return true;
}

double lp_value(const Vec& v, double p) {
  if (v.size() == 0) return 0.0;
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((v.cwiseAbs() / m).array().pow(p).sum(), 1.0 / p);
}

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

}  // namespace

Recovery polyhedral_estimate_diagonal(const SignalSet& X, const Vec& d, const Vec& c) {
  const int n = static_cast<int>(d.size());
  if (c.size() != n || X.dim() != n) throw std::invalid_argument("polyhedral_estimate_diagonal: dimension mismatch");
  Recovery out;
  out.x_hat = Vec::Zero(n);
  if (const Box* b = X.as<Box>()) {
    for (int i = 0; i < n; ++i) {
      const double target = d(i) != 0.0 ? c(i) / d(i) : 0.0;
      out.x_hat(i) = std::clamp(target, b->lower(i), b->upper(i));
    }
  } else if (const ScaledBall* sb = X.as<ScaledBall>()) {
    double s_lo = 0.0;
    for (int i = 0; i < n; ++i) {
      if (d(i) == 0.0) s_lo = std::max(s_lo, std::abs(c(i)));
    }
    auto point = [&](double s) {
      Vec u = Vec::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (d(i) == 0.0) continue;
        const double mag = std::max(0.0, std::abs(c(i)) - s) / std::abs(d(i));
        u(i) = (c(i) * d(i) >= 0.0 ? 1.0 : -1.0) * mag;
      }
      return u;
    };
    auto size = [&](const Vec& u) { return lp_value(sb->gamma.cwiseProduct(u), sb->p); };
    Vec u = point(s_lo);
    if (size(u) > 1.0) {
      double lo = s_lo;
      double hi = std::max(s_lo, c.cwiseAbs().maxCoeff());
      for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        (size(point(mid)) > 1.0 ? lo : hi) = mid;
      }
      u = point(hi);
    }
    out.x_hat = u;
  } else {
    throw std::invalid_argument("polyhedral_estimate_diagonal: signal set must be a Box or ScaledBall");
  }
  out.objective = n ? (c - d.cwiseProduct(out.x_hat)).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Recovery polyhedral_estimate(const EstimationProblem& problem, const ContrastMatrix& H, const Vec& omega) {
  if (omega.size() != problem.m()) throw std::invalid_argument("polyhedral_estimate: omega has wrong length");
  if (H.rows() != problem.m()) throw std::invalid_argument("polyhedral_estimate: contrast has wrong row count");
  if (!omega.allFinite()) throw std::invalid_argument("polyhedral_estimate: omega must be finite");
  Recovery out;
  const bool simple_set = problem.X.as<Box>() || problem.X.as<ScaledBall>();
  if (simple_set && H.cols() == problem.m() && problem.m() == problem.n() && exactly_diagonal(H.H) &&
      exactly_diagonal(problem.A)) {
    Vec hd = H.H.diagonal();
    out = polyhedral_estimate_diagonal(problem.X, hd.cwiseProduct(problem.A.diagonal()), hd.cwiseProduct(omega));
    out.w_hat = problem.B * out.x_hat;
    return out;
  }

  const double hmax = H.empty() ? 1.0 : std::max(H.H.cwiseAbs().maxCoeff(), 1e-300);
  const Mat G = H.H.transpose() / hmax;
  const Mat GA = G * problem.A;
  const Vec Gw = G * omega;
  Program prog;
  std::vector<Affine> u = emit_point(prog, problem.X);
  Affine s = prog.scalar();
  prog.add_nonneg(s);
  for (int j = 0; j < H.cols(); ++j) {
    Affine r = Affine(Gw(j)) - conic::dot(GA.row(j).transpose(), u);
    prog.add_leq(r, s);
    prog.add_leq(-r, s);
  }
  prog.minimize(s);
  conic::Solution sol = conic::solve(prog);
  if (!acceptable(sol)) throw std::runtime_error("polyhedral estimate: solver returned " + conic::to_string(sol.status));
  out.x_hat = sol.value(u);
  out.w_hat = problem.B * out.x_hat;
  out.objective = H.empty() ? 0.0 : (H.H.transpose() * (omega - problem.A * out.x_hat)).cwiseAbs().maxCoeff();
  return out;
}

Vec coordinate_widths(const EstimationProblem& problem, const ContrastMatrix& H) {
  if (H.rows() != problem.m()) throw std::invalid_argument("coordinate_widths: contrast has wrong row count");
  const SignalSet xs = problem.Xs();
  const int nu = problem.nu();
  Vec out = Vec::Zero(nu);
  if (H.empty()) {
    for (int l = 0; l < nu; ++l) out(l) = support_function(xs, problem.B.row(l).transpose());
    return out;
  }
  Program base;
  std::vector<Affine> x = emit_point(base, xs);
  const Mat GA = H.H.transpose() * problem.A;
  for (int j = 0; j < GA.rows(); ++j) {
    const double nrm = GA.row(j).norm();
    if (nrm == 0.0) continue;
    Affine r = conic::dot(GA.row(j).transpose() / nrm, x);
    base.add_leq(r, Affine(1.0 / nrm));
    base.add_leq(-r, Affine(1.0 / nrm));
  }
  for (int l = 0; l < nu; ++l) {
    const Vec b = problem.B.row(l).transpose();
    if (b.cwiseAbs().maxCoeff() == 0.0) continue;
    Program prog = base;
    prog.minimize(-conic::dot(b, x));
    conic::Solution sol = conic::solve(prog);
    if (!acceptable(sol)) throw std::runtime_error("coordinate width: solver returned " + conic::to_string(sol.status));
    out(l) = std::max(0.0, std::max(-sol.primal_objective, -sol.dual_objective));
  }
  return out;
}

RiskCertificate risk_linf_exact(const EstimationProblem& problem, const ContrastMatrix& H) {
  if (!problem.norm.is_lp() || !std::isinf(problem.norm.r())) {
    throw std::invalid_argument("risk_linf_exact needs the l_inf norm");
  }
  Vec w = coordinate_widths(problem, H);
  RiskCertificate c;
  c.bound = w.size() ? 2.0 * w.maxCoeff() : 0.0;
  c.eps = problem.eps;
  c.norm = problem.norm.describe();
  c.provenance = "exact-linf";
  return c;
}

RiskCertificate risk_bound_lr(const EstimationProblem& problem, const ContrastMatrix& H, std::optional<Vec> gamma,
                              double rho) {
  if (!problem.norm.is_lp()) throw std::invalid_argument("risk_bound_lr needs an l_r norm");
  Vec g = gamma ? *gamma : auto_gamma(problem);
  const double rr = gamma ? rho : kInf;
  RiskCertificate c;
  c.bound = psi_bound(coordinate_widths(problem, H), g, rr, problem.norm.r());
  c.eps = problem.eps;
  c.norm = problem.norm.describe();
  c.provenance = "psi";
  return c;
}

LinearBaseline linear_design_baseline(const EstimationProblem& problem) {
  const SubGaussian* g = std::get_if<SubGaussian>(&problem.scheme);
  if (!g) throw std::invalid_argument("linear baseline needs sub-Gaussian noise");
  const SignalSet bstar = problem.norm.is_lp() ? unit_ball(problem.nu(), conjugate_exponent(problem.norm.r()))
                                               : problem.norm.conjugate_ball();
  if (!spectratopic_form(problem.X)) {
    throw std::invalid_argument("linear baseline needs a spectratopic signal set, got " + problem.X.kind_name());
  }
  if (!spectratopic_form(bstar)) throw std::invalid_argument("linear baseline needs a spectratopic conjugate unit ball");

  const int m = problem.m();
  const int nu = problem.nu();
  LinearBaseline out;
  out.H = Mat::Zero(m, nu);
  if (problem.B.cwiseAbs().maxCoeff() == 0.0) return out;
  const double sigma = g->sigma;

  Program prog;
  QuadraticLifting lx = *emit_quadratic_lifting(prog, problem.X);
  QuadraticLifting l1 = *emit_quadratic_lifting(prog, bstar);
  QuadraticLifting l2 = *emit_quadratic_lifting(prog, bstar);
  const Mat Ay = problem.A * lx.M;
  const Mat By = problem.B * lx.M;
  const Mat MbT = l1.M.transpose();
  MatAffine Theta = prog.symmetric_scaled(m, 1.0 / std::max(sigma, 1e-8));
  MatAffine H = prog.matrix(m, nu);
  MatAffine off1 = 0.5 * (MbT * (MatAffine(By) - H.transpose() * Ay));
  prog.add_psd(MatAffine::blocks({{l1.S, off1}, {off1.transpose(), lx.S}}));
  MatAffine off2 = 0.5 * (MbT * H.transpose());
  prog.add_psd(MatAffine::blocks({{l2.S, off2}, {off2.transpose(), Theta}}));
  prog.minimize(lx.t + l1.t + l2.t + sigma * sigma * Theta.trace());
  conic::Solution sol = conic::solve(prog);
  if (!acceptable(sol)) throw std::runtime_error("linear baseline: solver returned " + conic::to_string(sol.status));
  out.H = sol.value(H);
  out.opt_star = sol.primal_objective;
  return out;
}

SignalSampler::SignalSampler(SignalSet X) : X_(std::move(X)) {
  const int n = X_.dim();
  if (const Box* b = X_.as<Box>()) {
    lo_ = b->lower;
    hi_ = b->upper;
  } else if (const ScaledBall* sb = X_.as<ScaledBall>()) {
    hi_ = sb->gamma.cwiseInverse();
    lo_ = -hi_;
  } else {
    lo_.resize(n);
    hi_.resize(n);
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Unit(n, i);
      hi_(i) = support_function(X_, e);
      lo_(i) = -support_function(X_, -e);
    }
  }
}

Vec SignalSampler::vertex(RngStream& rng) const {
  const int n = X_.dim();
  if (const Box* b = X_.as<Box>()) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform() < 0.5 ? b->lower(i) : b->upper(i);
    return x;
  }
  if (const ScaledBall* sb = X_.as<ScaledBall>()) {
    if (sb->p == 1.0) {
      Vec x = Vec::Zero(n);
      const int i = rng.uniform_index(n);
      x(i) = rng.rademacher() / sb->gamma(i);
      return x;
    }
    if (std::isinf(sb->p)) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.rademacher() / sb->gamma(i);
      return x;
    }
  }
  if (const Simplex* s = X_.as<Simplex>(); s && s->C.rows() == 0) {
    Vec x = Vec::Zero(n);
    const int k = rng.uniform_index(s->equality ? n : n + 1);
    if (k < n) x(k) = 1.0;
    return x;
  }
  return boundary(rng);
}

Vec SignalSampler::boundary(RngStream& rng) const { return support_point(X_, rng.normal_vector(X_.dim())); }

Vec SignalSampler::interior(RngStream& rng) const {
  const int n = X_.dim();
  for (int k = 0; k < 64; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = lo_(i) + (hi_(i) - lo_(i)) * rng.uniform();
    if (contains(X_, x, 0.0)) return x;
  }
  const double t = rng.uniform();
  return t * boundary(rng) + (1.0 - t) * boundary(rng);
}

Vec SignalSampler::sample(RngStream& rng) const {
  const double u = rng.uniform();
  if (u < 0.7) return vertex(rng);
  if (u < 0.9) return boundary(rng);
  return interior(rng);
}

double empirical_quantile(std::vector<double> errors, double eps) {
  if (errors.empty()) throw std::invalid_argument("empirical_quantile: no errors");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("empirical_quantile: eps must lie in (0,1)");
  std::sort(errors.begin(), errors.end());
  const double T = static_cast<double>(errors.size());
  long k = static_cast<long>(std::ceil((1.0 - eps) * (T + 1.0) - 1e-9));
  k = std::clamp<long>(k, 1, static_cast<long>(errors.size()));
  return errors[k - 1];
}

EmpiricalRisk empirical_quantile_risk(const EstimationProblem& problem, const EstimateFn& estimate, int trials,
                                      std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("empirical_quantile_risk: trials must be >= 1");
  SignalSampler sampler(problem.X);
  EmpiricalRisk out;
  out.errors.assign(trials, 0.0);
  parallel_for(trials, jobs, [&](int k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    Vec x = sampler.sample(rng);
    Vec omega = problem.A * x + sample_noise(problem.scheme, x, problem.A, rng);
    out.errors[k] = problem.norm.value(problem.B * x - estimate(omega));
  });
  out.quantile = empirical_quantile(out.errors, problem.eps);
  return out;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (error) return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(jobs, count);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace polyest
