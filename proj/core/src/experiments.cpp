#include "polyest/experiments.hpp"

#include "polyest/cones.hpp"
#include "polyest/direct_design.hpp"
#include "polyest/estimator.hpp"
#include "polyest/rng.hpp"
#include "polyest/sdp_design.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polyest {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kSigmaFloor = 1e-6;
constexpr std::uint64_t kRowStream = 0x524f5753ULL;
constexpr std::uint64_t kDesignStream = 0x44455347ULL;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

SignalSet conjugate_unit_ball(const EstimationProblem& p) {
  if (p.norm.is_lp()) return unit_ball(p.nu(), conjugate_exponent(p.norm.r()));
  return p.norm.conjugate_ball();
}

std::uint64_t trial_stream(std::size_t sigma_index, int trial) {
  return (static_cast<std::uint64_t>(sigma_index + 1) << 32) | static_cast<std::uint32_t>(trial);
}

// Shortest text that round-trips.
std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// A ready-to-apply estimator for one problem instance.
struct Plan {
  EstimatorKind kind;
  RiskCertificate certificate;
  ContrastMatrix contrast;
  Mat linear;  // m x nu weights for the linear estimate
  double seconds = 0.0;
};

ContrastMatrix identity_contrast(const EstimationProblem& p) {
  const int m = p.m();
  TailNormContext ctx = p.tail_context(p.eps / m);
  Mat H = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) H(i, i) = 1.0 / ctx.pi(Vec::Unit(m, i));
  return ContrastMatrix::from_columns(std::move(H), ctx, "identity");
}

RiskCertificate identity_certificate(const EstimationProblem& p, const ContrastMatrix& H) {
  if (p.norm.is_lp() && std::isinf(p.norm.r())) return risk_linf_exact(p, H);
  return risk_bound_lr(p, H);
}

Plan make_plan(const EstimationProblem& p, EstimatorKind kind, std::uint64_t seed) {
  Plan plan{kind, {}, {}, {}, 0.0};
  const auto t0 = Clock::now();
  switch (kind) {
    case EstimatorKind::Linear: {
      LinearBaseline lb = linear_design_baseline(p);
      plan.linear = lb.H;
      plan.certificate = {lb.opt_star, p.eps, p.norm.describe(), "linear-expected"};
      break;
    }
    case EstimatorKind::PolyDesign1: {
      DirectDesignResult d = build_contrast_direct(p);
      plan.contrast = d.H;
      plan.certificate = {d.psi.value, p.eps, p.norm.describe(), "design-I"};
      break;
    }
    case EstimatorKind::PolyDesign2: {
      ConePtr xc = compatible_cone(p.X);
      ConePtr uc = compatible_cone(conjugate_unit_ball(p));
      HCone hc = build_h_cone(z_set(p.scheme, p.eps, p.m(), p.X, p.A), p.m());
      RngStream rng(seed, kDesignStream);
      SdpDesignResult d = solve_design_sdp(p, *xc, *uc, hc, rng);
      plan.contrast = d.H;
      plan.certificate = {d.opt, p.eps, p.norm.describe(), "design-II"};
      break;
    }
    case EstimatorKind::IdentityContrast: {
      plan.contrast = identity_contrast(p);
      plan.certificate = identity_certificate(p, plan.contrast);
      break;
    }
  }
  plan.seconds = seconds_since(t0);
  return plan;
}

Vec apply_plan(const Plan& plan, const EstimationProblem& p, const Vec& omega) {
  if (plan.kind == EstimatorKind::Linear) return plan.linear.transpose() * omega;
  return polyhedral_estimate(p, plan.contrast, omega).w_hat;
}

double scheme_sigma(const ObservationScheme& s) {
  if (const SubGaussian* g = std::get_if<SubGaussian>(&s)) return g->sigma;
  return 0.0;
}

// Runs every plan on the same signal and noise per trial; rows come out ordered by (estimator, trial).
void run_trials(const ScenarioConfig& config, const EstimationProblem& truth, const EstimationProblem& model,
                const std::vector<Plan>& plans, std::size_t sigma_index, int trials, std::vector<ResultRow>& out) {
  const int k = static_cast<int>(plans.size());
  std::vector<ResultRow> rows(static_cast<std::size_t>(k) * trials);
  SignalSampler sampler(truth.X);
  const double sigma = scheme_sigma(truth.scheme);
  parallel_for(trials, config.jobs, [&](int t) {
    RngStream rng(config.seed, trial_stream(sigma_index, t));
    const Vec x = sampler.sample(rng);
    const Vec omega = truth.A * x + sample_noise(truth.scheme, x, truth.A, rng);
    const Vec w = truth.B * x;
    for (int e = 0; e < k; ++e) {
      const auto t0 = Clock::now();
      const Vec w_hat = apply_plan(plans[e], model, omega);
      const double secs = seconds_since(t0);
      ResultRow& row = rows[static_cast<std::size_t>(e) * trials + t];
      row.scenario = config.id;
      row.estimator = estimator_name(plans[e].kind);
      row.sigma = sigma;
      row.trial = t;
      row.error = truth.norm.value(w - w_hat);
      row.bound = plans[e].certificate.bound;
      row.seconds = config.record_timing ? secs : 0.0;
    }
  });
  out.insert(out.end(), rows.begin(), rows.end());
}

EstimationProblem with_sigma(EstimationProblem p, double sigma) {
  p.scheme = SubGaussian{sigma};
  return p;
}

void check_trials(int trials) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
}

void check_sigmas(const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw std::invalid_argument("sigma list is empty");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("sigma values must be finite and nonnegative");
  }
}

EstimationProblem double_integration_problem(const DoubleIntegrationSpec& s, std::uint64_t seed) {
  if (s.n < 1 || s.m < 1 || s.m > s.n) throw std::invalid_argument("double_integration needs 1 <= m <= n");
  if (!(s.eps > 0.0 && s.eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(s.r >= 1.0)) throw std::invalid_argument("norm exponent r must be >= 1");
  const double delta = s.delta > 0.0 ? s.delta : 4.0 / s.n;
  Mat B = double_integration_matrix(s.n, delta);
  std::vector<int> idx = sample_rows(s.n, s.m, seed);
  Mat A(s.m, s.n);
  for (int i = 0; i < s.m; ++i) A.row(i) = B.row(idx[i]);
  EstimationProblem p{A, B, make_box(-Vec::Ones(s.n), Vec::Ones(s.n)), NormSpec::lp(s.r), SubGaussian{1.0}, s.eps};
  p.validate();
  return p;
}

std::vector<EstimatorKind> or_default(const std::vector<EstimatorKind>& v, std::vector<EstimatorKind> fallback) {
  return v.empty() ? fallback : v;
}

void add_sampling_metadata(RunResult& r) {
  r.metadata.emplace_back("signal_sampling",
                          "70% extreme points, 20% support points of Gaussian directions, 10% interior points");
}

}  // namespace

std::string estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Linear: return "linear";
    case EstimatorKind::PolyDesign1: return "poly_design1";
    case EstimatorKind::PolyDesign2: return "poly_design2";
    case EstimatorKind::IdentityContrast: return "identity_contrast";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  for (EstimatorKind k : {EstimatorKind::Linear, EstimatorKind::PolyDesign1, EstimatorKind::PolyDesign2,
                          EstimatorKind::IdentityContrast}) {
    if (estimator_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

Mat double_integration_matrix(int n, double delta) {
  if (n < 1) throw std::invalid_argument("double_integration_matrix: n must be positive");
  Mat B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) B(i, j) = delta * delta * (i - j + 1);
  }
  return B;
}

std::vector<int> sample_rows(int n, int m, std::uint64_t seed) {
  if (m < 0 || m > n) throw std::invalid_argument("sample_rows: need 0 <= m <= n");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(seed, kRowStream);
  for (int i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  idx.resize(m);
  return idx;
}

RunResult run_double_integration(const ScenarioConfig& config) {
  const auto& s = std::get<DoubleIntegrationSpec>(config.spec);
  check_trials(s.trials);
  check_sigmas(s.sigma_list);
  const EstimationProblem base = double_integration_problem(s, config.seed);
  const std::vector<EstimatorKind> kinds =
      or_default(config.estimators, {EstimatorKind::Linear, EstimatorKind::PolyDesign1, EstimatorKind::PolyDesign2});
  RunResult out;
  add_sampling_metadata(out);
  std::ostringstream rows;
  for (int i : sample_rows(s.n, s.m, config.seed)) rows << (rows.tellp() ? " " : "") << i;
  out.metadata.emplace_back("observed_rows", rows.str());

  for (std::size_t si = 0; si < s.sigma_list.size(); ++si) {
    const double sigma = s.sigma_list[si];
    const EstimationProblem truth = with_sigma(base, sigma);
    const EstimationProblem model = with_sigma(base, std::max(sigma, kSigmaFloor));
    std::vector<Plan> plans;
    for (EstimatorKind k : kinds) plans.push_back(make_plan(model, k, config.seed));
    run_trials(config, truth, model, plans, si, s.trials, out.rows);
    for (const Plan& p : plans) {
      const std::string key = estimator_name(p.kind) + "@" + format_double(sigma);
      int violations = 0;
      for (const ResultRow& r : out.rows) {
        if (r.sigma == sigma && r.estimator == estimator_name(p.kind) && r.error > r.bound) ++violations;
      }
      out.summary.emplace_back("bound:" + key, p.certificate.bound);
      out.summary.emplace_back("violations:" + key, violations);
    }
  }
  return out;
}

std::pair<double, double> optimal_scalar_linear(int n, double sigma) {
  const double ns2 = n * sigma * sigma;
  auto risk = [ns2](double h) { return (1.0 - h) * (1.0 - h) + ns2 * h * h; };
  auto r = boost::math::tools::brent_find_minima(risk, 0.0, 1.0, std::numeric_limits<double>::digits);
  return {r.first, r.second};
}

RunResult run_motivating(const ScenarioConfig& config) {
  const auto& s = std::get<MotivatingSpec>(config.spec);
  check_trials(s.trials);
  if (s.n < 1) throw std::invalid_argument("motivating: n must be positive");
  if (!(s.sigma > 0.0)) throw std::invalid_argument("motivating: sigma must be positive");
  if (s.sigma > 2.0 * s.n / std::sqrt(std::exp(1.0))) throw std::invalid_argument("motivating: needs sigma <= 2n/sqrt(e)");
  const std::vector<EstimatorKind> kinds =
      or_default(config.estimators, {EstimatorKind::Linear, EstimatorKind::IdentityContrast});
  for (EstimatorKind k : kinds) {
    if (k != EstimatorKind::Linear && k != EstimatorKind::IdentityContrast) {
      throw std::invalid_argument("motivating supports the linear and identity_contrast estimators");
    }
  }
  const auto [h, linear_risk] = optimal_scalar_linear(s.n, s.sigma);
  const double poly_ref = 8.0 * s.sigma * std::sqrt(std::log(2.0 * s.n / s.sigma));
  const SignalSet X = unit_ball(s.n, 1.0);
  const SignalSampler sampler(X);
  const Vec ones = Vec::Ones(s.n);

  RunResult out;
  out.metadata.emplace_back("signal_sampling", "vertices +-e_i of the l1 ball");
  out.metadata.emplace_back("error", "squared l2");
  const int k = static_cast<int>(kinds.size());
  std::vector<ResultRow> rows(static_cast<std::size_t>(k) * s.trials);
  parallel_for(s.trials, config.jobs, [&](int t) {
    RngStream rng(config.seed, trial_stream(0, t));
    const Vec x = sampler.vertex(rng);
    const Vec omega = x + s.sigma * rng.normal_vector(s.n);
    for (int e = 0; e < k; ++e) {
      const auto t0 = Clock::now();
      Vec x_hat = kinds[e] == EstimatorKind::Linear ? Vec(h * omega)
                                                    : polyhedral_estimate_diagonal(X, ones, omega).x_hat;
      const double secs = seconds_since(t0);
      ResultRow& row = rows[static_cast<std::size_t>(e) * s.trials + t];
      row = {config.id, estimator_name(kinds[e]), s.sigma, t, (x_hat - x).squaredNorm(),
             kinds[e] == EstimatorKind::Linear ? linear_risk : poly_ref, config.record_timing ? secs : 0.0};
    }
  });
  out.rows = std::move(rows);
  out.summary.emplace_back("linear_h", h);
  out.summary.emplace_back("linear_risk_analytic", s.n * s.sigma * s.sigma / (1.0 + s.n * s.sigma * s.sigma));
  out.summary.emplace_back("linear_risk_minimized", linear_risk);
  out.summary.emplace_back("poly_risk_reference", poly_ref);
  for (EstimatorKind kind : kinds) {
    double sum = 0.0;
    for (const ResultRow& r : out.rows) {
      if (r.estimator == estimator_name(kind)) sum += r.error;
    }
    out.summary.emplace_back("mse:" + estimator_name(kind), sum / s.trials);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("loglog_slope: x values coincide");
  return (n * sxy - sx * sy) / den;
}

RunResult run_diagonal(const ScenarioConfig& config) {
  const auto& s = std::get<DiagonalSpec>(config.spec);
  check_trials(s.trials);
  check_sigmas(s.sigma);
  if (s.n < 1) throw std::invalid_argument("diagonal: n must be positive");
  if (!(s.eps > 0.0 && s.eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(s.beta >= s.alpha && s.alpha >= 0.0 && s.delta_exp >= 0.0)) {
    throw std::invalid_argument("diagonal: needs beta >= alpha >= 0 and delta_exp >= 0");
  }
  if (!(1.0 <= s.rho && s.rho <= s.r && std::isfinite(s.r))) throw std::invalid_argument("diagonal: needs 1 <= rho <= r < inf");
  if (!((s.beta - s.alpha) * s.r < 1.0)) throw std::invalid_argument("diagonal: needs (beta - alpha) r < 1");
  if (!config.estimators.empty() &&
      (config.estimators.size() != 1 || config.estimators[0] != EstimatorKind::IdentityContrast)) {
    throw std::invalid_argument("diagonal runs the identity_contrast estimator only");
  }
  Vec a(s.n), b(s.n), d(s.n);
  for (int l = 0; l < s.n; ++l) {
    const double ell = l + 1.0;
    a(l) = std::pow(ell, -s.alpha);
    b(l) = std::pow(ell, -s.beta);
    d(l) = std::pow(ell, s.delta_exp);
  }
  const SignalSet X = ScaledBall{d, s.rho};
  const SignalSampler sampler(X);
  RunResult out;
  add_sampling_metadata(out);
  std::vector<double> thetas, bounds;
  for (std::size_t si = 0; si < s.sigma.size(); ++si) {
    const double sigma = s.sigma[si];
    if (!(sigma > 0.0)) throw std::invalid_argument("diagonal: sigma must be positive");
    const double theta = sigma * std::sqrt(2.0 * std::log(2.0 * s.n / s.eps));
    if (theta > std::sqrt(2.0)) throw std::invalid_argument("diagonal: needs sigma sqrt(ln(2n/eps)) <= 1");
    DiagonalDesign dd = diagonal_design(a, d, b, sigma, s.eps, s.rho, s.r);
    const Vec hd = dd.H.diagonal();
    std::vector<ResultRow> rows(s.trials);
    parallel_for(s.trials, config.jobs, [&](int t) {
      RngStream rng(config.seed, trial_stream(si, t));
      const Vec x = sampler.sample(rng);
      const Vec omega = a.cwiseProduct(x) + sigma * rng.normal_vector(s.n);
      const auto t0 = Clock::now();
      const Vec x_hat = polyhedral_estimate_diagonal(X, hd.cwiseProduct(a), hd.cwiseProduct(omega)).x_hat;
      const double secs = seconds_since(t0);
      const Vec err = b.cwiseProduct(x - x_hat);
      rows[t] = {config.id, estimator_name(EstimatorKind::IdentityContrast), sigma, t, NormSpec::lp(s.r).value(err),
                 dd.bound, config.record_timing ? secs : 0.0};
    });
    std::vector<double> errors;
    for (const ResultRow& r : rows) errors.push_back(r.error);
    const std::string key = "@" + format_double(sigma);
    out.summary.emplace_back("frak_n" + key, dd.frak_n);
    out.summary.emplace_back("bound" + key, dd.bound);
    out.summary.emplace_back("quantile" + key, empirical_quantile(errors, s.eps));
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    thetas.push_back(dd.theta);
    bounds.push_back(dd.bound);
  }
  if (thetas.size() >= 2) {
    out.summary.emplace_back("slope", loglog_slope(thetas, bounds));
    out.summary.emplace_back("slope_expected", (s.beta + s.delta_exp + 1.0 / s.rho - 1.0 / s.r) /
                                                   (s.alpha + s.delta_exp + 1.0 / s.rho));
  }
  return out;
}

RunResult run_inline(const ScenarioConfig& config) {
  const auto& s = std::get<InlineSpec>(config.spec);
  check_trials(s.trials);
  s.problem.validate();
  std::vector<EstimatorKind> kinds = config.estimators;
  if (kinds.empty()) {
    kinds = {EstimatorKind::PolyDesign1, EstimatorKind::PolyDesign2};
    if (std::holds_alternative<SubGaussian>(s.problem.scheme)) kinds.insert(kinds.begin(), EstimatorKind::Linear);
  }
  EstimationProblem model = s.problem;
  if (const SubGaussian* g = std::get_if<SubGaussian>(&s.problem.scheme)) {
    model = with_sigma(s.problem, std::max(g->sigma, kSigmaFloor));
  }
  std::vector<Plan> plans;
  for (EstimatorKind k : kinds) plans.push_back(make_plan(model, k, config.seed));
  RunResult out;
  add_sampling_metadata(out);
  run_trials(config, s.problem, model, plans, 0, s.trials, out.rows);
  for (const Plan& p : plans) out.summary.emplace_back("bound:" + estimator_name(p.kind), p.certificate.bound);
  return out;
}

RunResult run_scenario(const ScenarioConfig& config) {
  if (config.jobs < 1) throw std::invalid_argument("jobs must be positive");
  RunResult r;
  if (std::holds_alternative<DoubleIntegrationSpec>(config.spec)) r = run_double_integration(config);
  else if (std::holds_alternative<MotivatingSpec>(config.spec)) r = run_motivating(config);
  else if (std::holds_alternative<DiagonalSpec>(config.spec)) r = run_diagonal(config);
  else r = run_inline(config);
  r.metadata.insert(r.metadata.begin(), {"seed", std::to_string(config.seed)});
  r.metadata.insert(r.metadata.begin(), {"scenario", config.id});
  return r;
}

DesignReport design_scenario(const ScenarioConfig& config) {
  DesignReport out;
  out.scenario = config.id;
  std::vector<std::pair<double, EstimationProblem>> problems;
  std::vector<EstimatorKind> kinds = config.estimators;
  if (const auto* s = std::get_if<DoubleIntegrationSpec>(&config.spec)) {
    check_sigmas(s->sigma_list);
    const EstimationProblem base = double_integration_problem(*s, config.seed);
    for (double sigma : s->sigma_list) problems.emplace_back(sigma, with_sigma(base, std::max(sigma, kSigmaFloor)));
    if (kinds.empty()) kinds = {EstimatorKind::Linear, EstimatorKind::PolyDesign1, EstimatorKind::PolyDesign2};
  } else if (const auto* s = std::get_if<InlineSpec>(&config.spec)) {
    s->problem.validate();
    EstimationProblem model = s->problem;
    const double sigma = scheme_sigma(model.scheme);
    if (std::holds_alternative<SubGaussian>(model.scheme)) model = with_sigma(model, std::max(sigma, kSigmaFloor));
    problems.emplace_back(sigma, model);
    if (kinds.empty()) kinds = {EstimatorKind::PolyDesign1, EstimatorKind::PolyDesign2};
  } else {
    throw std::invalid_argument("design supports double_integration and inline problems");
  }
  for (const auto& [sigma, p] : problems) {
    for (EstimatorKind k : kinds) {
      Plan plan = make_plan(p, k, config.seed);
      out.entries.push_back({estimator_name(k), sigma, k == EstimatorKind::Linear ? plan.linear : plan.contrast.H,
                             plan.certificate, config.record_timing ? plan.seconds : 0.0});
    }
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "scenario,estimator,sigma,trial,error,bound,seconds\n";
  for (const ResultRow& r : rows) {
    os << r.scenario << ',' << r.estimator << ',' << format_double(r.sigma) << ',' << r.trial << ','
       << format_double(r.error) << ',' << format_double(r.bound) << ',' << format_double(r.seconds) << '\n';
  }
}

}  // namespace polyest
