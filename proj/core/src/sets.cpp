#include "polyest/sets.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace polyest {

using conic::ConeKind;
using conic::Solution;
using conic::StandardForm;
using conic::Status;

namespace {

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double lp_norm(const Vec& v, double p) {
  if (v.size() == 0) return 0.0;
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((v.cwiseAbs() / m).array().pow(p).sum(), 1.0 / p);
}

std::vector<Affine> mat_times(const Mat& m, const std::vector<Affine>& x) {
  std::vector<Affine> out(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) out[i] += m(i, j) * x[j];
    }
    out[i].compact();
  }
  return out;
}

bool is_identity(const Mat& m) {
  return m.rows() == m.cols() && m.isIdentity(0.0);
}

// L with L L' = R for R symmetric psd; zero directions dropped.
Mat psd_factor(const Mat& r) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r + r.transpose()));
  const Vec& ev = es.eigenvalues();
  double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("ellitope matrix is not positive semidefinite");
  }
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) keep.push_back(i);
  }
  Mat l(r.rows(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) l.col(k) = es.eigenvectors().col(keep[k]) * std::sqrt(ev(keep[k]));
  return l;
}

Solution solve_checked(const Program& prog, const char* what) {
  Solution sol = conic::solve(prog);
  if (sol.status == Status::Unbounded) throw std::runtime_error(std::string(what) + ": set unbounded in direction");
  if (sol.status == Status::Infeasible) throw std::runtime_error(std::string(what) + ": set is empty");
  if (sol.status == Status::MaxIterations && !(sol.relative_gap < 1e-6 && sol.primal_residual < 1e-6)) {
    throw std::runtime_error(std::string(what) + ": solver did not converge");
  }
  return sol;
}

Vec ball_argmax(const ScaledBall& b, const Vec& d) {
  Vec c = d.cwiseQuotient(b.gamma);
  Vec y = Vec::Zero(c.size());
  if (c.size() == 0 || c.cwiseAbs().maxCoeff() == 0.0) return y;
  if (b.p == 1.0) {
    Eigen::Index k;
    c.cwiseAbs().maxCoeff(&k);
    y(k) = c(k) > 0 ? 1.0 : -1.0;
  } else if (std::isinf(b.p)) {
    for (int i = 0; i < c.size(); ++i) y(i) = c(i) > 0 ? 1.0 : (c(i) < 0 ? -1.0 : 0.0);
  } else {
    double q = conjugate_exponent(b.p);
    double nq = lp_norm(c, q);
    for (int i = 0; i < c.size(); ++i) {
      double a = std::abs(c(i)) / nq;
      y(i) = (c(i) >= 0 ? 1.0 : -1.0) * std::pow(a, q - 1.0);
    }
  }
  return y.cwiseQuotient(b.gamma);
}

void check_depth(int depth) {
  if (depth > kMaxNestingDepth) throw std::invalid_argument("unsupported nesting depth of signal set");
}

// h_set(d) <= t through the conic dual of the set's representation.
void emit_support_generic(Program& prog, const SignalSet& set, const std::vector<Affine>& d, const Affine& t,
                          int depth) {
  Program sub;
  std::vector<Affine> x = sub.vector(set.dim());
  constrain(sub, set, x, depth);
  StandardForm sf = sub.compile();

  std::vector<Affine> z(sf.cone_rows());
  for (const conic::ConeBlock& cb : sf.cones) {
    if (cb.kind == ConeKind::Nonneg) {
      for (int k = 0; k < cb.size; ++k) {
        z[cb.offset + k] = prog.scalar();
        prog.add_nonneg(z[cb.offset + k]);
      }
    } else if (cb.kind == ConeKind::SecondOrder) {
      std::vector<Affine> blk = prog.vector(cb.size);
      prog.add_soc(blk);
      for (int k = 0; k < cb.size; ++k) z[cb.offset + k] = blk[k];
    } else {
      MatAffine zm = prog.symmetric(cb.dim);
      prog.add_psd(zm);
      int k = 0;
      for (int j = 0; j < cb.dim; ++j) {
        for (int i = j; i < cb.dim; ++i, ++k) {
          z[cb.offset + k] = (i == j) ? zm(i, i) : std::sqrt(2.0) * zm(i, j);
        }
      }
    }
  }
  std::vector<Affine> y = prog.vector(static_cast<int>(sf.A.rows()));

  std::vector<Affine> col(sf.n);
  for (int j = 0; j < sf.G.outerSize(); ++j) {
    for (conic::SpMat::InnerIterator it(sf.G, j); it; ++it) col[j] += it.value() * z[it.row()];
  }
  for (int j = 0; j < sf.A.outerSize(); ++j) {
    for (conic::SpMat::InnerIterator it(sf.A, j); it; ++it) col[j] += it.value() * y[it.row()];
  }
  for (int j = 0; j < sf.n; ++j) {
    Affine e = col[j];
    if (j < set.dim()) e -= d[j];
    e.compact();
    prog.add_equality(e);
  }
  Affine obj;
  for (int r = 0; r < sf.cone_rows(); ++r) {
    if (sf.h(r) != 0.0) obj += sf.h(r) * z[r];
  }
  for (int r = 0; r < sf.A.rows(); ++r) {
    if (sf.b(r) != 0.0) obj += sf.b(r) * y[r];
  }
  obj.compact();
  prog.add_leq(obj, t);
}

}  // namespace

// ---------------------------------------------------------------- MonotoneSet

MonotoneSet MonotoneSet::box(Vec upper) {
  if (upper.size() == 0 || upper.minCoeff() <= 0.0) throw std::invalid_argument("monotone box needs positive bounds");
  MonotoneSet s;
  s.kind_ = Kind::Box;
  s.data_ = std::move(upper);
  return s;
}

MonotoneSet MonotoneSet::ball(Vec gamma, double p) {
  if (gamma.size() == 0 || gamma.minCoeff() <= 0.0 || !(p >= 1.0)) {
    throw std::invalid_argument("monotone ball needs positive scales and p >= 1");
  }
  MonotoneSet s;
  s.kind_ = Kind::Ball;
  s.data_ = std::move(gamma);
  s.p_ = p;
  return s;
}

MonotoneSet MonotoneSet::simplex(Vec weights) {
  if (weights.size() == 0 || weights.minCoeff() <= 0.0) {
    throw std::invalid_argument("monotone simplex needs positive weights");
  }
  MonotoneSet s;
  s.kind_ = Kind::Simplex;
  s.data_ = std::move(weights);
  return s;
}

double MonotoneSet::phi(const Vec& lambda) const {
  Vec l = lambda.cwiseMax(0.0);
  switch (kind_) {
    case Kind::Box:
      return data_.dot(l);
    case Kind::Ball:
      return lp_norm(l.cwiseQuotient(data_), conjugate_exponent(p_));
    case Kind::Simplex:
      return std::max(0.0, l.cwiseQuotient(data_).maxCoeff());
  }
  return 0.0;
}

void MonotoneSet::emit_phi_leq(Program& prog, const std::vector<Affine>& lambda, const Affine& t) const {
  switch (kind_) {
    case Kind::Box:
      prog.add_leq(conic::dot(data_, lambda), t);
      return;
    case Kind::Ball: {
      std::vector<Affine> s(lambda.size());
      for (std::size_t i = 0; i < lambda.size(); ++i) s[i] = lambda[i] * (1.0 / data_(i));
      conic::add_norm_leq(prog, s, t, conjugate_exponent(p_));
      return;
    }
    case Kind::Simplex:
      prog.add_nonneg(t);
      for (std::size_t i = 0; i < lambda.size(); ++i) prog.add_leq(lambda[i] * (1.0 / data_(i)), t);
      return;
  }
}

void MonotoneSet::emit_member(Program& prog, const std::vector<Affine>& r) const {
  for (const Affine& ri : r) prog.add_nonneg(ri);
  switch (kind_) {
    case Kind::Box:
      for (std::size_t i = 0; i < r.size(); ++i) prog.add_leq(r[i], data_(i));
      return;
    case Kind::Ball: {
      std::vector<Affine> s(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) s[i] = data_(i) * r[i];
      conic::add_norm_leq(prog, s, 1.0, p_);
      return;
    }
    case Kind::Simplex:
      prog.add_leq(conic::dot(data_, r), 1.0);
      return;
  }
}

bool MonotoneSet::contains(const Vec& r, double tol) const {
  if (r.size() != dim() || r.minCoeff() < -tol) return false;
  switch (kind_) {
    case Kind::Box:
      return (r - data_).maxCoeff() <= tol;
    case Kind::Ball:
      return lp_norm(data_.cwiseProduct(r.cwiseMax(0.0)), p_) <= 1.0 + tol;
    case Kind::Simplex:
      return data_.dot(r.cwiseMax(0.0)) <= 1.0 + tol;
  }
  return false;
}

// ---------------------------------------------------------------- SignalSet

Mat Spectratope::block(int l, const Vec& y) const {
  int d = static_cast<int>(R[l][0].rows());
  Mat out = Mat::Zero(d, d);
  for (int i = 0; i < y.size(); ++i) out += y(i) * R[l][i];
  return out;
}

SignalSet::SignalSet(Box b) {
  if (b.lower.size() != b.upper.size() || b.lower.size() == 0) throw std::invalid_argument("box bounds mismatch");
  if ((b.upper - b.lower).minCoeff() < 0.0) throw std::invalid_argument("box lower bound exceeds upper bound");
  int n = static_cast<int>(b.lower.size());
  node_ = std::make_shared<Node>(Node{std::move(b), n});
}

SignalSet::SignalSet(ScaledBall b) {
  if (b.gamma.size() == 0 || b.gamma.minCoeff() <= 0.0) throw std::invalid_argument("ball scales must be positive");
  if (!(b.p >= 1.0)) throw std::invalid_argument("ball exponent must be >= 1");
  int n = static_cast<int>(b.gamma.size());
  node_ = std::make_shared<Node>(Node{std::move(b), n});
}

SignalSet::SignalSet(Simplex s) {
  if (s.n <= 0) throw std::invalid_argument("simplex dimension must be positive");
  if (s.C.size() == 0) {
    s.C.resize(0, s.n);
    s.d.resize(0);
  }
  if (s.C.cols() != s.n || s.C.rows() != s.d.size()) throw std::invalid_argument("simplex constraint shape mismatch");
  int n = s.n;
  node_ = std::make_shared<Node>(Node{std::move(s), n});
}

SignalSet::SignalSet(Ellitope e) {
  if (e.R.empty() || static_cast<int>(e.R.size()) != e.calR.dim()) {
    throw std::invalid_argument("ellitope needs one matrix per coordinate of R");
  }
  for (const Mat& r : e.R) {
    if (r.rows() != e.M.cols() || r.cols() != e.M.cols()) throw std::invalid_argument("ellitope matrix shape mismatch");
  }
  int n = static_cast<int>(e.M.rows());
  node_ = std::make_shared<Node>(Node{std::move(e), n});
}

SignalSet::SignalSet(Spectratope s) {
  if (s.R.empty() || static_cast<int>(s.R.size()) != s.calR.dim()) {
    throw std::invalid_argument("spectratope needs one block family per coordinate of R");
  }
  for (const auto& fam : s.R) {
    if (static_cast<int>(fam.size()) != s.M.cols()) throw std::invalid_argument("spectratope family size mismatch");
    for (const Mat& r : fam) {
      if (r.rows() != fam[0].rows() || r.cols() != fam[0].rows()) {
        throw std::invalid_argument("spectratope block shape mismatch");
      }
      if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("spectratope blocks must be symmetric");
      }
    }
  }
  int n = static_cast<int>(s.M.rows());
  node_ = std::make_shared<Node>(Node{std::move(s), n});
}

SignalSet::SignalSet(LinearImage l) {
  if (l.M.cols() != l.inner.dim()) throw std::invalid_argument("linear image shape mismatch");
  int n = static_cast<int>(l.M.rows());
  node_ = std::make_shared<Node>(Node{std::move(l), n});
}

SignalSet::SignalSet(Intersection i) {
  if (i.parts.empty()) throw std::invalid_argument("empty intersection");
  int n = i.parts[0].dim();
  for (const SignalSet& p : i.parts) {
    if (p.dim() != n) throw std::invalid_argument("intersection dimension mismatch");
  }
  node_ = std::make_shared<Node>(Node{std::move(i), n});
}

SignalSet::SignalSet(Symmetrized s) {
  int n = s.inner.dim();
  node_ = std::make_shared<Node>(Node{std::move(s), n});
}

int SignalSet::dim() const { return node_->dim; }

std::string SignalSet::kind_name() const {
  static const char* names[] = {"box", "ball", "simplex", "ellitope", "spectratope", "linear_image", "intersection",
                                "symmetrized"};
  return names[node_->v.index()];
}

bool SignalSet::is_symmetric() const {
  if (const Box* b = as<Box>()) return (b->lower + b->upper).cwiseAbs().maxCoeff() == 0.0;
  if (as<Simplex>()) return false;
  if (const LinearImage* l = as<LinearImage>()) return l->inner.is_symmetric();
  if (const Intersection* in = as<Intersection>()) {
    return std::all_of(in->parts.begin(), in->parts.end(), [](const SignalSet& s) { return s.is_symmetric(); });
  }
  return true;
}

SignalSet unit_ball(int n, double p) { return ScaledBall{Vec::Ones(n), p}; }

SignalSet make_box(const Vec& lower, const Vec& upper) { return Box{lower, upper}; }

SignalSet unit_disk_ellitope(int n) {
  return Ellitope{Mat::Identity(n, n), {Mat::Identity(n, n)}, MonotoneSet::unit_box(1)};
}

SignalSet box_as_spectratope(int n) {
  Spectratope s;
  s.M = Mat::Identity(n, n);
  s.R.assign(n, std::vector<Mat>(n, Mat::Zero(1, 1)));
  for (int l = 0; l < n; ++l) s.R[l][l](0, 0) = 1.0;
  s.calR = MonotoneSet::unit_box(n);
  return s;
}

// ---------------------------------------------------------------- oracles

void constrain(Program& prog, const SignalSet& set, const std::vector<Affine>& x, int depth) {
  check_depth(depth);
  if (static_cast<int>(x.size()) != set.dim()) throw std::invalid_argument("constrain: dimension mismatch");
  const auto& v = set.node().v;
  if (const Box* b = std::get_if<Box>(&v)) {
    for (int i = 0; i < set.dim(); ++i) {
      if (b->lower(i) == b->upper(i)) {
        prog.add_equality(x[i] - b->lower(i));
      } else {
        prog.add_leq(b->lower(i), x[i]);
        prog.add_leq(x[i], b->upper(i));
      }
    }
  } else if (const ScaledBall* b = std::get_if<ScaledBall>(&v)) {
    std::vector<Affine> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = b->gamma(i) * x[i];
    conic::add_norm_leq(prog, s, 1.0, b->p);
  } else if (const Simplex* s = std::get_if<Simplex>(&v)) {
    for (const Affine& xi : x) prog.add_nonneg(xi);
    if (s->equality) {
      prog.add_equality(conic::sum(x) - 1.0);
    } else {
      prog.add_leq(conic::sum(x), 1.0);
    }
    std::vector<Affine> cx = mat_times(s->C, x);
    for (int i = 0; i < s->C.rows(); ++i) prog.add_leq(cx[i], s->d(i));
  } else if (const Ellitope* e = std::get_if<Ellitope>(&v)) {
    std::vector<Affine> y = is_identity(e->M) ? x : prog.vector(static_cast<int>(e->M.cols()));
    std::vector<Affine> r = prog.vector(e->calR.dim());
    e->calR.emit_member(prog, r);
    for (std::size_t l = 0; l < e->R.size(); ++l) {
      Mat f = psd_factor(e->R[l]);
      prog.add_rotated_soc(r[l], 1.0, mat_times(f.transpose(), y));
    }
    if (!is_identity(e->M)) {
      std::vector<Affine> my = mat_times(e->M, y);
      for (int i = 0; i < set.dim(); ++i) prog.add_equality(x[i] - my[i]);
    }
  } else if (const Spectratope* s = std::get_if<Spectratope>(&v)) {
    std::vector<Affine> y = is_identity(s->M) ? x : prog.vector(s->ydim());
    std::vector<Affine> r = prog.vector(s->calR.dim());
    s->calR.emit_member(prog, r);
    for (std::size_t l = 0; l < s->R.size(); ++l) {
      int d = static_cast<int>(s->R[l][0].rows());
      MatAffine ry(d, d);
      for (int i = 0; i < s->ydim(); ++i) {
        const Mat& ri = s->R[l][i];
        for (int a = 0; a < d; ++a) {
          for (int b = 0; b < d; ++b) {
            if (ri(a, b) != 0.0) ry.add(a, b, ri(a, b) * y[i]);
          }
        }
      }
      MatAffine eye(Mat::Identity(d, d));
      prog.add_psd(MatAffine::blocks({{MatAffine::identity(r[l], d), ry}, {ry, eye}}));
    }
    if (!is_identity(s->M)) {
      std::vector<Affine> my = mat_times(s->M, y);
      for (int i = 0; i < set.dim(); ++i) prog.add_equality(x[i] - my[i]);
    }
  } else if (const LinearImage* l = std::get_if<LinearImage>(&v)) {
    std::vector<Affine> z = prog.vector(l->inner.dim());
    constrain(prog, l->inner, z, depth + 1);
    std::vector<Affine> mz = mat_times(l->M, z);
    for (int i = 0; i < set.dim(); ++i) prog.add_equality(x[i] - mz[i]);
  } else if (const Intersection* in = std::get_if<Intersection>(&v)) {
    for (const SignalSet& p : in->parts) constrain(prog, p, x, depth + 1);
  } else if (const Symmetrized* sy = std::get_if<Symmetrized>(&v)) {
    std::vector<Affine> u = prog.vector(set.dim());
    std::vector<Affine> w = prog.vector(set.dim());
    constrain(prog, sy->inner, u, depth + 1);
    constrain(prog, sy->inner, w, depth + 1);
    for (int i = 0; i < set.dim(); ++i) prog.add_equality(x[i] - 0.5 * (u[i] - w[i]));
  }
}

std::vector<Affine> emit_point(Program& prog, const SignalSet& set) {
  std::vector<Affine> x = prog.vector(set.dim());
  constrain(prog, set, x);
  return x;
}

void emit_support_leq(Program& prog, const SignalSet& set, const std::vector<Affine>& d, const Affine& t, int depth) {
  check_depth(depth);
  if (static_cast<int>(d.size()) != set.dim()) throw std::invalid_argument("emit_support_leq: dimension mismatch");
  const auto& v = set.node().v;
  if (const Box* b = std::get_if<Box>(&v)) {
    Affine total;
    for (int i = 0; i < set.dim(); ++i) {
      double c = 0.5 * (b->lower(i) + b->upper(i));
      double w = 0.5 * (b->upper(i) - b->lower(i));
      if (c != 0.0) total += c * d[i];
      if (w > 0.0) total += w * conic::add_abs(prog, {d[i]})[0];
    }
    prog.add_leq(total, t);
  } else if (const ScaledBall* b = std::get_if<ScaledBall>(&v)) {
    std::vector<Affine> s(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) s[i] = d[i] * (1.0 / b->gamma(i));
    conic::add_norm_leq(prog, s, t, conjugate_exponent(b->p));
  } else if (const Simplex* s = std::get_if<Simplex>(&v); s && s->C.rows() == 0) {
    if (!s->equality) prog.add_nonneg(t);
    for (const Affine& di : d) prog.add_leq(di, t);
  } else if (const LinearImage* l = std::get_if<LinearImage>(&v)) {
    emit_support_leq(prog, l->inner, mat_times(l->M.transpose(), d), t, depth + 1);
  } else if (const Symmetrized* sy = std::get_if<Symmetrized>(&v)) {
    Affine t1 = prog.scalar();
    Affine t2 = prog.scalar();
    std::vector<Affine> nd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) nd[i] = -d[i];
    emit_support_leq(prog, sy->inner, d, t1, depth + 1);
    emit_support_leq(prog, sy->inner, nd, t2, depth + 1);
    prog.add_leq(0.5 * (t1 + t2), t);
  } else {
    emit_support_generic(prog, set, d, t, depth);
  }
}

double support_function(const SignalSet& set, const Vec& d) {
  if (d.size() != set.dim()) throw std::invalid_argument("support_function: dimension mismatch");
  const auto& v = set.node().v;
  if (const Box* b = std::get_if<Box>(&v)) {
    return d.cwiseProduct(b->lower).cwiseMax(d.cwiseProduct(b->upper)).sum();
  }
  if (const ScaledBall* b = std::get_if<ScaledBall>(&v)) {
    return lp_norm(d.cwiseQuotient(b->gamma), conjugate_exponent(b->p));
  }
  if (const Simplex* s = std::get_if<Simplex>(&v); s && s->C.rows() == 0) {
    double m = d.maxCoeff();
    return s->equality ? m : std::max(0.0, m);
  }
  if (const LinearImage* l = std::get_if<LinearImage>(&v)) return support_function(l->inner, l->M.transpose() * d);
  if (const Symmetrized* sy = std::get_if<Symmetrized>(&v)) {
    return 0.5 * (support_function(sy->inner, d) + support_function(sy->inner, -d));
  }
  Program prog;
  std::vector<Affine> x = emit_point(prog, set);
  prog.minimize(-conic::dot(d, x));
  Solution sol = solve_checked(prog, "support_function");
  return -sol.primal_objective;
}

Vec support_point(const SignalSet& set, const Vec& d) {
  if (d.size() != set.dim()) throw std::invalid_argument("support_point: dimension mismatch");
  const auto& v = set.node().v;
  if (const Box* b = std::get_if<Box>(&v)) {
    Vec x(d.size());
    for (int i = 0; i < d.size(); ++i) {
      x(i) = d(i) > 0 ? b->upper(i) : (d(i) < 0 ? b->lower(i) : 0.5 * (b->lower(i) + b->upper(i)));
    }
    return x;
  }
  if (const ScaledBall* b = std::get_if<ScaledBall>(&v)) return ball_argmax(*b, d);
  if (const Simplex* s = std::get_if<Simplex>(&v); s && s->C.rows() == 0) {
    Vec x = Vec::Zero(d.size());
    Eigen::Index k;
    double m = d.maxCoeff(&k);
    if (s->equality || m > 0) x(k) = 1.0;
    return x;
  }
  if (const LinearImage* l = std::get_if<LinearImage>(&v)) return l->M * support_point(l->inner, l->M.transpose() * d);
  if (const Symmetrized* sy = std::get_if<Symmetrized>(&v)) {
    return 0.5 * (support_point(sy->inner, d) - support_point(sy->inner, -d));
  }
  Program prog;
  std::vector<Affine> x = emit_point(prog, set);
  prog.minimize(-conic::dot(d, x));
  Solution sol = solve_checked(prog, "support_point");
  return sol.value(x);
}

SignalSet symmetrize(const SignalSet& set) {
  if (set.is_symmetric()) return set;
  if (const Box* b = set.as<Box>()) {
    Vec half = 0.5 * (b->upper - b->lower);
    return Box{-half, half};
  }
  if (const LinearImage* l = set.as<LinearImage>()) return LinearImage{l->M, symmetrize(l->inner)};
  return Symmetrized{set};
}

bool contains(const SignalSet& set, const Vec& x, double tol) {
  if (x.size() != set.dim() || !x.allFinite()) return false;
  const auto& v = set.node().v;
  if (const Box* b = std::get_if<Box>(&v)) {
    return (b->lower - x).maxCoeff() <= tol && (x - b->upper).maxCoeff() <= tol;
  }
  if (const ScaledBall* b = std::get_if<ScaledBall>(&v)) return lp_norm(b->gamma.cwiseProduct(x), b->p) <= 1.0 + tol;
  if (const Simplex* s = std::get_if<Simplex>(&v)) {
    if (x.minCoeff() < -tol) return false;
    double total = x.sum();
    if (s->equality ? std::abs(total - 1.0) > tol : total > 1.0 + tol) return false;
    return s->C.rows() == 0 || (s->C * x - s->d).maxCoeff() <= tol;
  }
  if (const Intersection* in = std::get_if<Intersection>(&v)) {
    return std::all_of(in->parts.begin(), in->parts.end(), [&](const SignalSet& p) { return contains(p, x, tol); });
  }
  Program prog;
  std::vector<Affine> xc(x.size());
  for (int i = 0; i < x.size(); ++i) xc[i] = Affine(x(i));
  constrain(prog, set, xc);
  return conic::check_membership(prog, tol);
}

// ---------------------------------------------------------------- NormSpec

NormSpec NormSpec::lp(double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("norm exponent must be >= 1");
  NormSpec n;
  n.r_ = r;
  return n;
}

NormSpec NormSpec::dual_of(SignalSet unit_ball_star) {
  if (!unit_ball_star.is_symmetric()) throw std::invalid_argument("conjugate unit ball must be symmetric");
  NormSpec n;
  n.r_ = 0.0;
  n.ball_ = std::make_shared<const SignalSet>(std::move(unit_ball_star));
  return n;
}

double NormSpec::value(const Vec& w) const {
  if (is_lp()) return lp_norm(w, r_);
  return support_function(*ball_, w);
}

std::string NormSpec::describe() const {
  if (!is_lp()) return "dual-" + ball_->kind_name();
  if (std::isinf(r_)) return "linf";
  std::ostringstream os;
  os << "l" << r_;
  return os.str();
}

std::optional<Ellitope> ellitopic_form(const SignalSet& set) {
  const int n = set.dim();
  if (const Ellitope* el = set.as<Ellitope>()) return *el;
  auto coordinate_ellitope = [n](Mat M, MonotoneSet calR) {
    Ellitope e{std::move(M), {}, std::move(calR)};
    for (int l = 0; l < n; ++l) {
      Mat r = Mat::Zero(n, n);
      r(l, l) = 1.0;
      e.R.push_back(r);
    }
    return e;
  };
  if (const Box* b = set.as<Box>()) {
    if (!set.is_symmetric()) return std::nullopt;
    return coordinate_ellitope(b->upper.asDiagonal(), MonotoneSet::unit_box(n));
  }
  if (const ScaledBall* sb = set.as<ScaledBall>()) {
    if (sb->p < 2.0) return std::nullopt;
    Mat M = sb->gamma.cwiseInverse().asDiagonal();
    if (sb->p == 2.0) return Ellitope{M, {Mat::Identity(n, n)}, MonotoneSet::unit_box(1)};
    return coordinate_ellitope(M, std::isinf(sb->p) ? MonotoneSet::unit_box(n) : MonotoneSet::ball(Vec::Ones(n), sb->p / 2.0));
  }
  return std::nullopt;
}

std::optional<Spectratope> spectratopic_form(const SignalSet& set) {
  if (const Spectratope* s = set.as<Spectratope>()) return *s;
  std::optional<Ellitope> el = ellitopic_form(set);
  if (!el) return std::nullopt;
  const Ellitope& e = *el;
  // y'R y <= r  iff  (S[y])^2 <= r I for S[y] = L'y (rank one) or [[0, (L'y)'], [L'y, 0]].
  Spectratope s;
  s.M = e.M;
  s.calR = e.calR;
  const int k = static_cast<int>(e.M.cols());
  for (const Mat& r : e.R) {
    Mat l = psd_factor(r);
    std::vector<Mat> blocks;
    if (l.cols() <= 1) {
      for (int i = 0; i < k; ++i) blocks.push_back(Mat::Constant(1, 1, l.cols() ? l(i, 0) : 0.0));
    } else {
      const int d = static_cast<int>(l.cols()) + 1;
      for (int i = 0; i < k; ++i) {
        Mat b = Mat::Zero(d, d);
        b.block(0, 1, 1, d - 1) = l.row(i);
        b.block(1, 0, d - 1, 1) = l.row(i).transpose();
        blocks.push_back(b);
      }
    }
    s.R.push_back(std::move(blocks));
  }
  return s;
}

}  // namespace polyest
