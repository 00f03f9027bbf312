#include "polyest/verify.hpp"

#include "polyest/cones.hpp"
#include "polyest/direct_design.hpp"
#include "polyest/estimator.hpp"
#include "polyest/experiments.hpp"
#include "polyest/rng.hpp"
#include "polyest/sdp_design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace polyest {

namespace {

using PointFn = std::function<Vec(RngStream&)>;

struct Ctx {
  std::string suite;
  std::uint64_t seed;
  int jobs;
  VerifyReport* report;

  void add(const std::string& name, bool ok, const std::string& detail) {
    report->checks.push_back({suite, name, ok, detail});
  }
  // Records an exception thrown by a check as a failure.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("threw: ") + e.what());
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Mat random_matrix(int r, int c, RngStream& rng) {
  Mat M(r, c);
  for (int k = 0; k < r * c; ++k) M.data()[k] = rng.normal();
  return M;
}

Mat random_psd(int n, int rank, RngStream& rng) {
  Mat G = random_matrix(n, rank, rng);
  return G * G.transpose() / rank;
}

Mat random_sym(int n, RngStream& rng) {
  Mat G = random_matrix(n, n, rng);
  return 0.5 * (G + G.transpose());
}

Mat column_stochastic(int m, int n, RngStream& rng) {
  Mat A(m, n);
  for (int k = 0; k < m * n; ++k) A.data()[k] = 0.1 + rng.uniform();
  for (int j = 0; j < n; ++j) A.col(j) /= A.col(j).sum();
  return A;
}

// ---------------------------------------------------------------------------
// lemma-rademacher

void suite_lemma(Ctx& c) {
  for (int m : {2, 4, 8, 16}) {
    c.guarded("reconstruction m=" + std::to_string(m), [&] {
      RngStream rng(c.seed, 100 + m);
      const int n = 3;
      const Mat A = column_stochastic(m, n, rng);
      Simplex sx;
      sx.n = n;
      sx.C = Mat(0, n);
      sx.d = Vec(0);
      const HCone hc = build_h_cone(z_set(DiscreteScheme{50}, 0.1, m, sx, A), m);
      const Mat V = dct_matrix(m);
      double worst = 0.0;
      int accepted = 0;
      int draws = 0;
      bool units = true;
      for (int k = 0; k < 20; ++k) {
        const Mat Theta = random_psd(m, 1 + rng.uniform_index(m), rng);
        const double mu = hc.mu_min(Theta) * (1.0 + rng.uniform());
        ContrastWeights w = theta_to_contrast(Theta, mu, hc, rng);
        const Mat rec = w.H * w.lambda.asDiagonal() * w.H.transpose();
        worst = std::max(worst, (rec - Theta).norm() / Theta.norm());
        units = units && columns_within_unit(w.H, hc, 1e-9) && w.lambda.sum() <= mu * (1 + 1e-12);
        const Mat Q = psd_factor(Theta);
        for (int t = 0; t < 50; ++t) {
          Vec chi(m);
          for (int i = 0; i < m; ++i) chi(i) = rng.rademacher();
          accepted += columns_within_unit(signed_contrast(Q, mu, chi, V), hc);
          ++draws;
        }
      }
      const double rate = static_cast<double>(accepted) / draws;
      c.add("reconstruction m=" + std::to_string(m), worst <= 1e-8 && units,
            "max rel Frobenius error " + fmt(worst) + (units ? "" : ", column or weight bound violated"));
      c.add("acceptance rate m=" + std::to_string(m), rate >= 0.40, "rate " + fmt(rate));
    });
    c.guarded("singleton m=" + std::to_string(m), [&] {
      RngStream rng(c.seed, 200 + m);
      const HCone hc = build_h_cone(z_set(SubGaussian{0.3}, 0.1, m, unit_ball(2, 2), Mat::Zero(m, 2)), m);
      const Mat Theta = random_psd(m, m, rng);
      ContrastWeights w = theta_to_contrast(Theta, hc.mu_min(Theta), hc, rng);
      const double err = (w.H * w.lambda.asDiagonal() * w.H.transpose() - Theta).norm() / Theta.norm();
      const bool ok = err <= 1e-8 && columns_within_unit(w.H, hc, 1e-9);
      c.add("singleton m=" + std::to_string(m), ok, "rel error " + fmt(err));
    });
  }
}

// ---------------------------------------------------------------------------
// tail-bounds

struct SchemeCase {
  std::string name;
  ObservationScheme scheme;
  Mat A;
  SignalSet X;
};

void suite_tail(Ctx& c, int samples) {
  const int m = 6;
  const int n = 4;
  RngStream setup(c.seed, 300);
  Simplex sx;
  sx.n = n;
  sx.C = Mat(0, n);
  sx.d = Vec(0);
  Mat Ap(m, n);
  for (int k = 0; k < m * n; ++k) Ap.data()[k] = 20.0 * setup.uniform();
  std::vector<SchemeCase> cases{
      {"sub-gaussian", SubGaussian{0.7}, random_matrix(m, n, setup), unit_ball(n, 2)},
      {"discrete", DiscreteScheme{40}, column_stochastic(m, n, setup), sx},
      {"poisson", PoissonScheme{}, Ap, sx},
  };
  const double delta = 0.05;
  const double tol = delta + 3.0 * std::sqrt(delta / samples);
  for (const SchemeCase& sc : cases) {
    c.guarded(sc.name, [&] {
      TailNormContext ctx(sc.scheme, delta, sc.A, sc.X);
      double worst = 0.0;
      std::mutex mu;
      parallel_for(20, c.jobs, [&](int k) {
        RngStream rng(c.seed, 400 + k);
        Vec h = rng.normal_vector(m);
        h /= ctx.pi(h);
        const Vec x = support_point(sc.X, sc.A.transpose() * h.cwiseAbs2());
        long hits = 0;
        for (int s = 0; s < samples; ++s) hits += std::abs(h.dot(sample_noise(sc.scheme, x, sc.A, rng))) > 1.0;
        std::lock_guard<std::mutex> lock(mu);
        worst = std::max(worst, static_cast<double>(hits) / samples);
      });
      c.add(sc.name, worst <= tol, "max exceedance " + fmt(worst) + " vs " + fmt(tol));
    });
  }
}

// ---------------------------------------------------------------------------
// cone-fuzz

struct FuzzCase {
  std::string name;
  ConePtr cone;
  PointFn point;
};

PointFn sampler_points(const SignalSet& X) {
  auto s = std::make_shared<SignalSampler>(X);
  return [s](RngStream& rng) { return s->sample(rng); };
}

Spectratope random_spectratope(int n, RngStream& rng) {
  Spectratope s;
  s.M = Mat::Identity(n, n);
  for (int l = 0; l < 2; ++l) {
    std::vector<Mat> R;
    for (int i = 0; i < n; ++i) R.push_back(random_sym(3, rng));
    s.R.push_back(R);
  }
  s.calR = MonotoneSet::unit_box(2);
  return s;
}

Ellitope random_ellitope(int n, RngStream& rng) {
  Ellitope e;
  e.M = Mat::Identity(n, n) + 0.3 * random_matrix(n, n, rng);
  for (int l = 0; l < 3; ++l) e.R.push_back(random_psd(n, 2, rng) + 0.1 * Mat::Identity(n, n));
  e.calR = MonotoneSet::ball(Vec::Ones(3), 2.0);
  return e;
}

std::vector<FuzzCase> fuzz_cases(RngStream& rng) {
  std::vector<FuzzCase> out;
  const int n = 4;
  const Spectratope sp = random_spectratope(n, rng);
  out.push_back({"spectratope", spectratope_cone(sp), sampler_points(sp)});
  const Ellitope el = random_ellitope(n, rng);
  out.push_back({"ellitope", ellitope_cone(el), sampler_points(el)});
  for (double s : {1.0, 1.5, 2.0, 3.0, 4.0, kInf}) {
    const SignalSet ball = unit_ball(n, s);
    out.push_back({"abs-norm s=" + fmt(s), absolute_norm_cone(n, s), sampler_points(ball)});
    if (s >= 2.0) {
      out.push_back({"abs-norm general s=" + fmt(s), absolute_norm_cone(n, s, std::nullopt, AbsNormForm::General),
                     sampler_points(ball)});
    }
  }
  const SignalSet l2 = unit_ball(n, 2.0);
  const SignalSet box = make_box(-0.7 * Vec::Ones(n), 0.7 * Vec::Ones(n));
  const SignalSet l1 = unit_ball(n, 1.0);
  out.push_back({"intersection", intersection_cone({compatible_cone(l2), compatible_cone(box)}),
                 sampler_points(Intersection{{l2, box}})});
  {
    auto a = sampler_points(l1);
    auto b = sampler_points(el);
    out.push_back({"convex-hull", convex_hull_cone({compatible_cone(l1), ellitope_cone(el)}), [a, b](RngStream& r) {
                     const double t = r.uniform();
                     return Vec(t * a(r) + (1 - t) * b(r));
                   }});
  }
  {
    auto a = sampler_points(unit_ball(2, 2.0));
    auto b = sampler_points(make_box(-Vec::Ones(3), Vec::Ones(3)));
    out.push_back({"product",
                   product_cone({compatible_cone(unit_ball(2, 2.0)), compatible_cone(make_box(-Vec::Ones(3), Vec::Ones(3)))}),
                   [a, b](RngStream& r) {
                     Vec y(5);
                     y << a(r), b(r);
                     return y;
                   }});
  }
  {
    const Mat M = random_matrix(3, n, rng);
    auto a = sampler_points(box);
    out.push_back({"linear-image", linear_image_cone(compatible_cone(box), M), [a, M](RngStream& r) { return Vec(M * a(r)); }});
  }
  {
    const Mat P = Mat::Identity(n, n) + 0.4 * random_matrix(n, n, rng);
    const Mat Pinv = P.inverse();
    auto a = sampler_points(sp);
    out.push_back({"inverse-image", inverse_image_cone(spectratope_cone(sp), P),
                   [a, Pinv](RngStream& r) { return Vec(Pinv * a(r)); }});
  }
  {
    auto a = sampler_points(l2);
    auto b = sampler_points(box);
    out.push_back({"sum", sum_cone({compatible_cone(l2), compatible_cone(box)}),
                   [a, b](RngStream& r) { return Vec(a(r) + b(r)); }});
  }
  {
    auto a = sampler_points(el);
    out.push_back({"widen", widen_cone(ellitope_cone(el)), [a](RngStream& r) { return Vec(a(r) - a(r)); }});
  }
  return out;
}

void suite_cone_fuzz(Ctx& c, int members, int points) {
  RngStream rng(c.seed, 500);
  for (FuzzCase& fc : fuzz_cases(rng)) {
    c.guarded(fc.name, [&] {
      const int N = fc.cone->dim();
      std::vector<Vec> ys;
      for (int k = 0; k < points; ++k) ys.push_back(fc.point(rng));
      std::vector<std::pair<Mat, double>> mem(members);
      parallel_for(members, c.jobs, [&](int k) {
        RngStream r(c.seed, 600 + k);
        Mat V = random_psd(N, 1 + r.uniform_index(N), r);
        mem[k] = {V, fc.cone->min_tau(V)};
      });
      double worst = 0.0;
      bool ok = true;
      for (const auto& [V, tau] : mem) {
        if (!std::isfinite(tau)) {
          ok = false;
          continue;
        }
        for (const Vec& y : ys) {
          const double q = y.dot(V * y);
          worst = std::max(worst, q / tau);
          ok = ok && q <= tau * (1.0 + 1e-6);
        }
      }
      c.add(fc.name, ok, "max y'Vy/tau " + fmt(worst));
    });
  }
  for (double s : {2.0, 3.0, 4.0, kInf}) {
    c.guarded("abs-norm forms s=" + fmt(s), [&] {
      ConePtr g = absolute_norm_cone(6, s, std::nullopt, AbsNormForm::General);
      ConePtr d = absolute_norm_cone(6, s, std::nullopt, AbsNormForm::Diagonal);
      double worst = 0.0;
      for (int k = 0; k < 50; ++k) {
        Mat V = random_psd(6, 1 + rng.uniform_index(6), rng);
        const double tg = g->min_tau(V);
        const double td = d->min_tau(V);
        worst = std::max(worst, std::abs(tg - td) / std::max(td, 1e-12));
      }
      c.add("abs-norm forms s=" + fmt(s), worst <= 1e-5, "max rel difference " + fmt(worst));
    });
  }
}

// ---------------------------------------------------------------------------
// closed-forms

// max ||v ./ gamma||_r over ||v||_rho <= 1, 0 <= v <= cap by a grid over all but the last coordinate.
double psi_grid(const Vec& cap, const Vec& gamma, double rho, double r, int grid) {
  const int nu = static_cast<int>(cap.size());
  auto lp = [](const Vec& v, double p) {
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
  };
  Vec v = Vec::Zero(nu);
  double best = 0.0;
  std::function<void(int)> rec = [&](int i) {
    if (i == nu - 1) {
      Vec head = v.head(nu - 1);
      double room;
      if (std::isinf(rho)) {
        room = 1.0;
      } else {
        const double used = nu > 1 ? std::pow(lp(head, rho), rho) : 0.0;
        if (used > 1.0) return;
        room = std::pow(1.0 - used, 1.0 / rho);
      }
      v(i) = std::min(cap(i), room);
      best = std::max(best, lp(v.cwiseQuotient(gamma), r));
      return;
    }
    const double top = std::isinf(rho) ? cap(i) : std::min(cap(i), 1.0);
    for (int g = 0; g <= grid; ++g) {
      v(i) = top * g / grid;
      rec(i + 1);
    }
  };
  rec(0);
  return 2.0 * best;
}

void suite_closed_forms(Ctx& c) {
  for (int n : {4, 16}) {
    for (double sigma : {0.01, 0.1}) {
      const std::string name = "design-II l1 ball n=" + std::to_string(n) + " sigma=" + fmt(sigma);
      c.guarded(name, [&] {
        EstimationProblem p{Mat::Identity(n, n), Mat::Identity(n, n), unit_ball(n, 1.0), NormSpec::lp(2.0),
                            SubGaussian{sigma}, 0.1};
        RngStream rng(c.seed, 700 + n);
        SdpDesignResult d = solve_design_sdp(p, *compatible_cone(p.X), *compatible_cone(unit_ball(n, 2.0)),
                                             build_h_cone(z_set(p.scheme, p.eps, n, p.X, p.A), n), rng);
        const double kappa = std::sqrt(2.0 * std::log(2.0 * n / p.eps));
        const double cf = 2.0 * std::min(kappa * sigma * std::sqrt(static_cast<double>(n)), 1.0);
        const double rel = std::abs(d.opt - cf) / cf;
        c.add(name, rel <= 0.02, "opt " + fmt(d.opt) + " closed form " + fmt(cf));
      });
    }
  }
  c.guarded("diagonal saddle columns", [&] {
    RngStream rng(c.seed, 800);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const int n = 2 + rng.uniform_index(6);
      Vec a(n), b(n), d(n);
      for (int i = 0; i < n; ++i) {
        a(i) = 0.2 + rng.uniform();
        b(i) = 0.2 + rng.uniform();
        d(i) = 0.2 + 2.0 * rng.uniform();
      }
      const double sigma = 0.05 + 0.3 * rng.uniform();
      EstimationProblem p{Mat(a.asDiagonal()), Mat(b.asDiagonal()), SignalSet(ScaledBall{d, kInf}), NormSpec::lp(2.0),
                          SubGaussian{sigma}, 0.1};
      TailNormContext ctx = p.tail_context(p.eps / n);
      for (int l = 0; l < n; ++l) {
        const double expect = b(l) * std::min(ctx.theta() / a(l), 1.0 / d(l));
        worst = std::max(worst, std::abs(solve_saddle_column(p, l, ctx).opt - expect));
      }
    }
    c.add("diagonal saddle columns", worst <= 1e-6, "max abs error " + fmt(worst));
  });
  c.guarded("psi vs grid", [&] {
    RngStream rng(c.seed, 900);
    double worst = 0.0;
    bool below = false;
    for (int k = 0; k < 20; ++k) {
      const int nu = 1 + rng.uniform_index(3);
      Vec s(nu), g(nu);
      for (int i = 0; i < nu; ++i) {
        s(i) = 0.1 + rng.uniform();
        g(i) = 0.5 + rng.uniform();
      }
      const double rho = std::vector<double>{1.0, 1.5, 2.0, kInf}[rng.uniform_index(4)];
      const double r = std::vector<double>{1.0, 2.0, 3.0, kInf}[rng.uniform_index(4)];
      const double psi = psi_bound(s, g, rho, r);
      const double grid = psi_grid(g.cwiseProduct(s), g, rho, r, 400);
      below = below || psi < grid * (1.0 - 1e-6);
      worst = std::max(worst, std::abs(psi - grid) / grid);
    }
    c.add("psi vs grid", !below && worst <= 0.01, "max rel gap " + fmt(worst) + (below ? ", psi below grid" : ""));
  });
  c.guarded("scalar linear risk", [&] {
    double worst = 0.0;
    for (int n : {1, 10, 100, 10000}) {
      for (double sigma : {0.01, 0.1, 1.0}) {
        const double ns2 = n * sigma * sigma;
        worst = std::max(worst, std::abs(optimal_scalar_linear(n, sigma).second - ns2 / (1.0 + ns2)));
      }
    }
    c.add("scalar linear risk", worst <= 1e-9, "max abs error " + fmt(worst));
  });
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"lemma-rademacher", "tail-bounds", "cone-fuzz", "closed-forms", "all"};
  return names;
}

VerifyReport run_verify(const std::string& suite, std::uint64_t seed, int jobs) {
  if (std::find(verify_suites().begin(), verify_suites().end(), suite) == verify_suites().end()) {
    throw std::invalid_argument("unknown verify suite '" + suite + "'");
  }
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");
  VerifyReport report;
  const bool all = suite == "all";
  auto ctx = [&](const char* name) { return Ctx{name, seed, jobs, &report}; };
  if (all || suite == "lemma-rademacher") {
    Ctx c = ctx("lemma-rademacher");
    suite_lemma(c);
  }
  if (all || suite == "tail-bounds") {
    Ctx c = ctx("tail-bounds");
    suite_tail(c, 20000);
  }
  if (all || suite == "cone-fuzz") {
    Ctx c = ctx("cone-fuzz");
    suite_cone_fuzz(c, 20, 50);
  }
  if (all || suite == "closed-forms") {
    Ctx c = ctx("closed-forms");
    suite_closed_forms(c);
  }
  return report;
}

}  // namespace polyest
