#include "polyest/direct_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polyest {

ContrastMatrix ContrastMatrix::from_columns(Mat H, const TailNormContext& ctx, std::string provenance) {
  ContrastMatrix c;
  c.pi.resize(H.cols());
  for (int j = 0; j < H.cols(); ++j) {
    double p = ctx.pi(H.col(j));
    if (p > 1.0) {
      H.col(j) /= p;
      p = ctx.pi(H.col(j));
    }
    c.pi(j) = p;
  }
  c.H = std::move(H);
  c.delta = ctx.delta();
  c.provenance = std::move(provenance);
  return c;
}

ColumnDesign solve_saddle(const Mat& A, const SignalSet& Xs, const Vec& b, const TailNormContext& ctx) {
  const int m = static_cast<int>(A.rows());
  ColumnDesign out;
  out.g = Vec::Zero(m);
  const double at_zero = support_function(Xs, b);
  if (b.cwiseAbs().maxCoeff() == 0.0 || m == 0) {
    out.opt = at_zero;
    out.dropped = true;
    return out;
  }

  Program prog;
  std::vector<Affine> g = prog.vector(m);
  Affine t1 = prog.scalar();
  Affine t2 = prog.scalar();
  ctx.emit_pi_leq(prog, g, t1);
  std::vector<Affine> dir(A.cols());
  for (int j = 0; j < A.cols(); ++j) {
    dir[j] = Affine(b(j));
    for (int i = 0; i < m; ++i) {
      if (A(i, j) != 0.0) dir[j] -= A(i, j) * g[i];
    }
  }
  emit_support_leq(prog, Xs, dir, t2);
  prog.minimize(t1 + t2);
  conic::Solution sol = conic::solve(prog);
  if (!sol.optimal() && !(sol.status == conic::Status::MaxIterations && sol.relative_gap < 1e-5)) {
    throw std::runtime_error("column design: solver returned " + conic::to_string(sol.status));
  }

  Vec gv = sol.value(g);
  double pg = ctx.pi(gv);
  double at_g = pg + support_function(Xs, b - A.transpose() * gv);
  if (pg <= 0.0 || at_zero <= at_g) {
    out.opt = at_zero;
    out.dropped = true;
    return out;
  }
  out.opt = at_g;
  out.g = gv;
  out.h = gv / pg;
  return out;
}

ColumnDesign solve_saddle_column(const EstimationProblem& problem, int ell, const TailNormContext& ctx) {
  if (ell < 0 || ell >= problem.nu()) throw std::out_of_range("column index out of range");
  return solve_saddle(problem.A, problem.Xs(), problem.B.row(ell).transpose(), ctx);
}

namespace {

double lp_value(const Vec& v, double r) {
  if (std::isinf(r)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  double m = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return 0.0;
  return m * std::pow((v.cwiseAbs() / m).array().pow(r).sum(), 1.0 / r);
}

struct Item {
  double c;  // gamma^-r
  double U;  // upper bound on u = v^rho
};

// max sum c u^theta over {sum u <= 1, 0 <= u <= U}, theta <= 1.
std::pair<double, double> concave_fill(const std::vector<Item>& items, double theta) {
  if (theta == 1.0) {
    std::vector<Item> s = items;
    std::sort(s.begin(), s.end(), [](const Item& x, const Item& y) { return x.c > y.c; });
    double left = 1.0;
    double val = 0.0;
    for (const Item& it : s) {
      double u = std::min(it.U, left);
      val += it.c * u;
      left -= u;
      if (left <= 0.0) break;
    }
    return {val, val};
  }
  auto u_of = [&](const Item& it, double lam) {
    return std::min(it.U, std::pow(it.c * theta / lam, 1.0 / (1.0 - theta)));
  };
  auto total = [&](double lam) {
    double s = 0.0;
    for (const Item& it : items) s += u_of(it, lam);
    return s;
  };
  double lo = 1.0;
  double hi = 1.0;
  while (total(lo) < 1.0) lo *= 0.5;
  while (total(hi) > 1.0) hi *= 2.0;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    double mid = std::sqrt(lo * hi);
    (total(mid) > 1.0 ? lo : hi) = mid;
  }
  double primal = 0.0;
  double dual = hi;
  for (const Item& it : items) {
    double u = u_of(it, hi);
    primal += it.c * std::pow(u, theta);
    dual += it.c * std::pow(u, theta) - hi * u;
  }
  return {std::max(primal, dual), primal};
}

// Budget split into K levels; item charged j levels holds u in [j/K, (j+1)/K).
std::pair<double, double> convex_dp(const std::vector<Item>& items, double theta, int K) {
  const double step = 1.0 / K;
  std::vector<double> up(K + 1, 0.0), lo(K + 1, 0.0), nup(K + 1), nlo(K + 1);
  for (const Item& it : items) {
    int J = std::min(K, static_cast<int>(std::floor(it.U / step)));
    std::vector<double> fu(J + 1), fl(J + 1);
    for (int j = 0; j <= J; ++j) {
      fu[j] = it.c * std::pow(std::min(it.U, (j + 1) * step), theta);
      fl[j] = it.c * std::pow(std::min(it.U, j * step), theta);
    }
    for (int k = 0; k <= K; ++k) {
      double bu = up[k] + fu[0];
      double bl = lo[k] + fl[0];
      for (int j = 1; j <= std::min(J, k); ++j) {
        bu = std::max(bu, up[k - j] + fu[j]);
        bl = std::max(bl, lo[k - j] + fl[j]);
      }
      nup[k] = bu;
      nlo[k] = bl;
    }
    up.swap(nup);
    lo.swap(nlo);
  }
  return {up[K], lo[K]};
}

}  // namespace

PsiResult psi_bound_detail(const Vec& varsigma, const Vec& gamma, double rho, double r, int levels) {
  if (varsigma.size() != gamma.size()) throw std::invalid_argument("psi_bound: size mismatch");
  if (!(rho >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("psi_bound: exponents must be >= 1");
  if (varsigma.size() && (varsigma.minCoeff() < 0.0 || !varsigma.allFinite())) {
    throw std::invalid_argument("psi_bound: varsigma must be finite and nonnegative");
  }
  if (gamma.size() && !(gamma.minCoeff() > 0.0)) throw std::invalid_argument("psi_bound: gamma must be positive");
  const int nu = static_cast<int>(varsigma.size());
  PsiResult res;
  Vec cap(nu);
  for (int l = 0; l < nu; ++l) cap(l) = std::isinf(gamma(l)) ? 0.0 : std::min(varsigma(l), 1.0 / gamma(l));

  if (std::isinf(r)) {
    res.regime = "r=inf";
    res.value = res.lower = nu ? 2.0 * cap.maxCoeff() : 0.0;
    return res;
  }
  if (std::isinf(rho)) {
    res.regime = "rho=inf";
    res.value = res.lower = 2.0 * lp_value(cap, r);
    return res;
  }

  const double theta = r / rho;
  std::vector<Item> items;
  double total_u = 0.0;
  double full = 0.0;
  for (int l = 0; l < nu; ++l) {
    if (cap(l) <= 0.0) continue;
    Item it{std::pow(gamma(l), -r), std::min(1.0, std::pow(gamma(l) * varsigma(l), rho))};
    items.push_back(it);
    total_u += it.U;
    full += it.c * std::pow(it.U, theta);
  }
  if (total_u <= 1.0) {
    res.regime = r <= rho ? "concave" : "dp";
    res.value = res.lower = 2.0 * std::pow(full, 1.0 / r);
    return res;
  }
  std::pair<double, double> vals;
  if (r <= rho) {
    res.regime = "concave";
    vals = concave_fill(items, theta);
  } else {
    res.regime = "dp";
    vals = convex_dp(items, theta, levels);
  }
  res.value = 2.0 * std::pow(vals.first, 1.0 / r);
  res.lower = 2.0 * std::pow(vals.second, 1.0 / r);
  return res;
}

double psi_bound(const Vec& varsigma, const Vec& gamma, double rho, double r) {
  return psi_bound_detail(varsigma, gamma, rho, r).value;
}

Vec auto_gamma(const EstimationProblem& problem) {
  SignalSet xs = problem.Xs();
  Vec gamma(problem.nu());
  for (int l = 0; l < problem.nu(); ++l) {
    double h = support_function(xs, problem.B.row(l).transpose());
    gamma(l) = h > 0.0 ? 1.0 / h : kInf;
  }
  return gamma;
}

DirectDesignResult build_contrast_direct(const EstimationProblem& problem, std::optional<Vec> gamma, double rho) {
  if (!problem.norm.is_lp()) throw std::invalid_argument("direct design needs an l_r norm");
  const int nu = problem.nu();
  DirectDesignResult out;
  out.varsigma = Vec::Zero(nu);
  out.gamma = gamma ? *gamma : auto_gamma(problem);
  out.rho = gamma ? rho : kInf;
  if (out.gamma.size() != nu) throw std::invalid_argument("gamma size must equal the number of rows of B");

  TailNormContext ctx = problem.tail_context(problem.eps / std::max(1, nu));
  SignalSet xs = problem.Xs();
  std::vector<Vec> cols;
  for (int l = 0; l < nu; ++l) {
    ColumnDesign c = solve_saddle(problem.A, xs, problem.B.row(l).transpose(), ctx);
    out.varsigma(l) = c.opt;
    if (!c.dropped) cols.push_back(c.h);
  }
  Mat H(problem.m(), static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) H.col(j) = cols[j];
  out.H = ContrastMatrix::from_columns(std::move(H), ctx, "design-I");
  out.psi = psi_bound_detail(out.varsigma, out.gamma, out.rho, problem.norm.r());
  return out;
}

DiagonalDesign diagonal_design(const Vec& a, const Vec& d, const Vec& b, double sigma, double eps, double rho,
                               double r) {
  const int n = static_cast<int>(a.size());
  if (n == 0 || d.size() != n || b.size() != n) throw std::invalid_argument("diagonal design: size mismatch");
  if (a.minCoeff() <= 0.0 || d.minCoeff() <= 0.0 || b.minCoeff() <= 0.0) {
    throw std::invalid_argument("diagonal design: a, d, b must be positive");
  }
  if (!(sigma > 0.0) || !(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("diagonal design: bad sigma or eps");
  if (!(1.0 <= rho && rho <= r && std::isfinite(r))) throw std::invalid_argument("diagonal design needs 1 <= rho <= r < inf");
  for (int l = 1; l < n; ++l) {
    const double tol = 1e-12;
    if (a(l) / d(l) > a(l - 1) / d(l - 1) * (1 + tol) || b(l) / a(l) > b(l - 1) / a(l - 1) * (1 + tol)) {
      std::ostringstream os;
      os << "diagonal design: a/d and b/a must be nonincreasing, violated at index " << l;
      throw std::invalid_argument(os.str());
    }
  }
  DiagonalDesign out;
  out.theta = sigma * std::sqrt(2.0 * std::log(2.0 * n / eps));
  out.varsigma.resize(n);
  for (int l = 0; l < n; ++l) out.varsigma(l) = b(l) * std::min(out.theta / a(l), 1.0 / d(l));

  double acc = 0.0;
  out.frak_n = n;
  for (int l = 0; l < n; ++l) {
    acc += std::pow(out.theta * d(l) / a(l), rho);
    if (acc > 1.0) {
      out.frak_n = l + 1;
      break;
    }
  }
  double s = 0.0;
  for (int l = 0; l < out.frak_n; ++l) s += std::pow(out.theta * b(l) / a(l), r);
  out.bound = 2.0 * std::pow(s, 1.0 / r);
  out.H = Mat::Identity(n, n) / out.theta;
  return out;
}

}  // namespace polyest
