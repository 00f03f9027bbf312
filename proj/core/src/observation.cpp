#include "polyest/observation.hpp"

#include <cmath>
#include <stdexcept>

namespace polyest {

std::string scheme_name(const ObservationScheme& s) {
  switch (s.index()) {
    case 0:
      return "subgaussian";
    case 1:
      return "discrete";
    default:
      return "poisson";
  }
}

void validate_scheme(const ObservationScheme& s, const SignalSet& X, const Mat& A) {
  if (A.cols() != X.dim()) throw std::invalid_argument("sensing matrix does not match the signal dimension");
  if (const SubGaussian* g = std::get_if<SubGaussian>(&s)) {
    if (!(g->sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
    return;
  }
  const double tol = 1e-7;
  if (A.size() > 0 && A.minCoeff() < 0.0) throw std::invalid_argument("sensing matrix must be entrywise nonnegative");
  const int n = X.dim();
  for (int i = 0; i < n; ++i) {
    if (support_function(X, -Vec::Unit(n, i)) > tol) throw std::invalid_argument("signal set leaves the nonnegative orthant");
  }
  if (const DiscreteScheme* d = std::get_if<DiscreteScheme>(&s)) {
    if (d->K < 1) throw std::invalid_argument("discrete scheme needs K >= 1");
    Vec ones = Vec::Ones(n);
    if (support_function(X, ones) > 1.0 + tol || -support_function(X, -ones) < 1.0 - tol) {
      throw std::invalid_argument("signal set is not contained in the probabilistic simplex");
    }
    Vec colsum = A.colwise().sum().transpose();
    if ((colsum.array() - 1.0).abs().maxCoeff() > 1e-9) throw std::invalid_argument("sensing matrix is not column-stochastic");
  }
}

TailNormContext::TailNormContext(ObservationScheme scheme, double delta, Mat A, SignalSet X)
    : scheme_(std::move(scheme)), delta_(delta), A_(std::move(A)), X_(std::move(X)) {
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const double l = std::log(2.0 / delta_);
  if (const SubGaussian* g = std::get_if<SubGaussian>(&scheme_)) {
    if (!(g->sigma > 0.0)) throw std::invalid_argument("tail norm needs sigma > 0");
    theta_ = g->sigma * std::sqrt(2.0 * l);
  } else if (const DiscreteScheme* d = std::get_if<DiscreteScheme>(&scheme_)) {
    theta_ = l / static_cast<double>(d->K);
    c_ = 16.0 / 9.0;
  } else {
    theta_ = l;
    c_ = 4.0 / 9.0;
  }
}

double TailNormContext::quad_term(const Vec& h) const {
  return support_function(X_, A_.transpose() * h.cwiseAbs2());
}

double TailNormContext::pi(const Vec& h) const {
  if (h.size() != m()) throw std::invalid_argument("pi: dimension mismatch");
  if (std::holds_alternative<SubGaussian>(scheme_)) return theta_ * h.norm();
  if (h.size() == 0 || h.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  double hinf = h.cwiseAbs().maxCoeff();
  double q = std::max(0.0, quad_term(h));
  return 2.0 * std::sqrt(theta_ * q + c_ * theta_ * theta_ * hinf * hinf);
}

void TailNormContext::emit_pi_leq(Program& prog, const std::vector<Affine>& h, const Affine& t) const {
  if (static_cast<int>(h.size()) != m()) throw std::invalid_argument("emit_pi_leq: dimension mismatch");
  if (std::holds_alternative<SubGaussian>(scheme_)) {
    std::vector<Affine> rows{t};
    for (const Affine& hi : h) rows.push_back(theta_ * hi);
    prog.add_soc(rows);
    return;
  }
  // rho >= sqrt(quad_term(h)) via h_i^2 <= w_i rho and h_X(A'w) <= rho; v >= ||h||_inf.
  Affine rho = prog.scalar();
  Affine v = prog.scalar();
  std::vector<Affine> w = prog.vector(m());
  for (int i = 0; i < m(); ++i) {
    prog.add_rotated_soc(w[i], rho, {h[i]});
    prog.add_leq(h[i], v);
    prog.add_leq(-h[i], v);
  }
  std::vector<Affine> atw(A_.cols());
  for (int j = 0; j < A_.cols(); ++j) {
    for (int i = 0; i < A_.rows(); ++i) {
      if (A_(i, j) != 0.0) atw[j] += A_(i, j) * w[i];
    }
  }
  emit_support_leq(prog, X_, atw, rho);
  prog.add_soc({t, 2.0 * std::sqrt(theta_) * rho, 2.0 * std::sqrt(c_) * theta_ * v});
}

ZSet ZSet::singleton(Vec zbar) {
  if (zbar.size() == 0 || zbar.minCoeff() < 0.0) throw std::invalid_argument("z-set point must be nonnegative");
  ZSet z;
  z.singleton_ = true;
  z.m_ = static_cast<int>(zbar.size());
  z.zbar_ = std::move(zbar);
  return z;
}

ZSet ZSet::image_plus_simplex(double a, double b, Mat A, SignalSet X) {
  ZSet z;
  z.singleton_ = false;
  z.m_ = static_cast<int>(A.rows());
  z.a_ = a;
  z.b_ = b;
  z.A_ = std::move(A);
  z.X_ = std::make_shared<const SignalSet>(std::move(X));
  return z;
}

double ZSet::phi(const Vec& r) const {
  if (r.size() != m_) throw std::invalid_argument("phi: dimension mismatch");
  if (singleton_) return zbar_.dot(r);
  return a_ * support_function(*X_, A_.transpose() * r) + b_ * r.maxCoeff();
}

void ZSet::emit_phi_leq(Program& prog, const std::vector<Affine>& r, const Affine& t) const {
  if (static_cast<int>(r.size()) != m_) throw std::invalid_argument("emit_phi_leq: dimension mismatch");
  if (singleton_) {
    prog.add_leq(conic::dot(zbar_, r), t);
    return;
  }
  Affine s1 = prog.scalar();
  Affine s2 = prog.scalar();
  std::vector<Affine> atr(A_.cols());
  for (int j = 0; j < A_.cols(); ++j) {
    for (int i = 0; i < A_.rows(); ++i) {
      if (A_(i, j) != 0.0) atr[j] += A_(i, j) * r[i];
    }
  }
  emit_support_leq(prog, *X_, atr, s1);
  for (const Affine& ri : r) prog.add_leq(ri, s2);
  prog.add_leq(a_ * s1 + b_ * s2, t);
}

double ZSet::pi(const Vec& h) const { return std::sqrt(std::max(0.0, phi(h.cwiseAbs2()))); }

ZSet z_set(const ObservationScheme& scheme, double eps, int m, const SignalSet& X, const Mat& A) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (A.rows() != m) throw std::invalid_argument("z_set: row count mismatch");
  const double l = std::log(2.0 * m / eps);
  if (const SubGaussian* g = std::get_if<SubGaussian>(&scheme)) {
    return ZSet::singleton(Vec::Constant(m, 2.0 * g->sigma * g->sigma * l));
  }
  if (const DiscreteScheme* d = std::get_if<DiscreteScheme>(&scheme)) {
    double k = static_cast<double>(d->K);
    return ZSet::image_plus_simplex(4.0 * l / k, 64.0 * l * l / (9.0 * k * k), A, X);
  }
  return ZSet::image_plus_simplex(4.0 * l, 16.0 * l * l / 9.0, A, X);
}

Vec sample_noise(const ObservationScheme& scheme, const Vec& x, const Mat& A, RngStream& rng) {
  const int m = static_cast<int>(A.rows());
  if (const SubGaussian* g = std::get_if<SubGaussian>(&scheme)) {
    if (g->sigma == 0.0) return Vec::Zero(m);
    return g->sigma * rng.normal_vector(m);
  }
  Vec p = A * x;
  if (m > 0 && p.minCoeff() < -1e-12) throw std::invalid_argument("negative observation intensity");
  p = p.cwiseMax(0.0);
  Vec omega(m);
  if (const DiscreteScheme* d = std::get_if<DiscreteScheme>(&scheme)) {
    std::vector<long> counts = rng.multinomial(d->K, p);
    for (int i = 0; i < m; ++i) omega(i) = static_cast<double>(counts[i]) / static_cast<double>(d->K);
  } else {
    for (int i = 0; i < m; ++i) omega(i) = static_cast<double>(rng.poisson(p(i)));
  }
  return omega - p;
}

}  // namespace polyest
