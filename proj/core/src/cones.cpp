#include "polyest/cones.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace polyest {

namespace {

double min_eig(const Mat& V) {
  if (V.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (V + V.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eig(const Mat& V) {
  if (V.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (V + V.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(V.rows() - 1);
}

bool is_constant(const MatAffine& V) {
  for (const conic::MatTerm& t : V.terms()) {
    if (t.coef != 0.0) return false;
  }
  return true;
}

// V >= 0; a constant V is checked directly so that a singular V does not pin a slack to the boundary.
void add_psd_member(Program& prog, const MatAffine& V) {
  if (is_constant(V)) {
    const Mat& C = V.constant();
    const double lo = min_eig(C);
    if (lo < -1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff())) prog.add_nonneg(Affine(lo));
    return;
  }
  prog.add_psd(V);
}

void check_square(const Mat& V, int n, const char* who) {
  if (V.rows() != n || V.cols() != n) throw std::invalid_argument(std::string(who) + ": matrix dimension mismatch");
}

// Conservative rounding of a solver-computed minimal tau.
double round_up(double v) { return v + 1e-7 * std::abs(v) + 1e-12; }

std::optional<Mat> inverse_if_regular(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return std::nullopt;
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0)) return std::nullopt;
  return Mat(M.inverse());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class SpectratopeCone final : public CompatCone {
 public:
  explicit SpectratopeCone(Spectratope s) : CompatCone(static_cast<int>(s.M.rows())), s_(std::move(s)) {
    minv_ = inverse_if_regular(s_.M);
  }

  std::string name() const override { return "spectratope"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    Affine t;
    MatAffine S = emit_spectratope_lifting(prog, s_, t);
    prog.add_leq(t, tau);
    prog.add_psd(S - congruence(s_.M, V));
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    if (!minv_) return std::nullopt;
    Affine t;
    MatAffine S = emit_spectratope_lifting(prog, s_, t);
    return Majorant{congruence(*minv_, S), t};
  }

 private:
  Spectratope s_;
  std::optional<Mat> minv_;
};

class EllitopeCone final : public CompatCone {
 public:
  explicit EllitopeCone(Ellitope e) : CompatCone(static_cast<int>(e.M.rows())), e_(std::move(e)) {
    minv_ = inverse_if_regular(e_.M);
  }

  std::string name() const override { return "ellitope"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    Affine t;
    MatAffine S = lifted(prog, t);
    prog.add_leq(t, tau);
    prog.add_psd(S - congruence(e_.M, V));
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    if (!minv_) return std::nullopt;
    Affine t;
    MatAffine S = lifted(prog, t);
    return Majorant{congruence(*minv_, S), t};
  }

  double min_tau(const Mat& V) const override {
    check_square(V, dim(), "ellitope cone");
    if (min_eig(V) < -1e-12 * std::max(1.0, V.cwiseAbs().maxCoeff())) return kInf;
    if (e_.R.size() == 1 && minv_ && e_.calR.kind() == MonotoneSet::Kind::Box) {
      Eigen::SelfAdjointEigenSolver<Mat> es(e_.R[0]);
      if (es.eigenvalues()(0) > 1e-12 * es.eigenvalues().maxCoeff()) {
        Mat isq = es.operatorInverseSqrt();
        Mat W = isq * e_.M.transpose() * V * e_.M * isq;
        return e_.calR.data()(0) * std::max(0.0, max_eig(W));
      }
    }
    return CompatCone::min_tau(V);
  }

 private:
  MatAffine lifted(Program& prog, Affine& t) const { return emit_ellitope_lifting(prog, e_, t); }

  Ellitope e_;
  std::optional<Mat> minv_;
};

class AbsNormCone final : public CompatCone {
 public:
  AbsNormCone(int N, double s, double q, AbsNormForm form) : CompatCone(N), s_(s), q_(q), form_(form) {}

  std::string name() const override {
    std::string base = "P^" + (std::isinf(s_) ? std::string("inf") : fmt(s_));
    if (form_ == AbsNormForm::General) base += "(general, q=" + (std::isinf(q_) ? std::string("inf") : fmt(q_)) + ")";
    return base;
  }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    const int N = dim();
    if (closed_form()) {
      for (const Affine& d : V.diagonal()) prog.add_leq(d, tau);
      return;
    }
    if (form_ == AbsNormForm::Diagonal) {
      Majorant mj = *diagonal_majorant(prog);
      prog.add_psd(mj.V - V);
      prog.add_leq(mj.tau, tau);
      return;
    }
    MatAffine W = prog.symmetric(N);
    std::vector<Affine> w = prog.vector(N);
    for (const Affine& wi : w) prog.add_nonneg(wi);
    Affine a = prog.scalar();
    Affine b = prog.scalar();
    conic::add_norm_leq(prog, W.flatten(), a, conjugate(s_));
    conic::add_norm_leq(prog, w, b, conjugate(q_));
    prog.add_leq(a + b, tau);
    prog.add_psd(W + MatAffine::diag(w) - V);
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    if (form_ != AbsNormForm::Diagonal) return std::nullopt;
    return diagonal_majorant(prog);
  }

  double min_tau(const Mat& V) const override {
    check_square(V, dim(), "absolute norm cone");
    const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
    if (closed_form() || (form_ == AbsNormForm::Diagonal && s_ == 2.0)) {
      if (min_eig(V) < -1e-12 * scale) return kInf;
      return closed_form() ? V.diagonal().maxCoeff() : std::max(0.0, max_eig(V));
    }
    return CompatCone::min_tau(V);
  }

 private:
  static double conjugate(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
  }

  bool closed_form() const { return form_ == AbsNormForm::Auto && s_ == 1.0; }

  std::optional<Majorant> diagonal_majorant(Program& prog) const {
    const int N = dim();
    Affine t = prog.scalar();
    if (s_ == 2.0) return Majorant{MatAffine::identity(t, N), t};
    std::vector<Affine> w = prog.vector(N);
    for (const Affine& wi : w) prog.add_nonneg(wi);
    const double e = std::isinf(s_) ? 1.0 : s_ / (s_ - 2.0);
    conic::add_norm_leq(prog, w, t, e);
    return Majorant{MatAffine::diag(w), t};
  }

  double s_;
  double q_;
  AbsNormForm form_;
};

class IntersectionCone final : public CompatCone {
 public:
  explicit IntersectionCone(std::vector<ConePtr> parts) : CompatCone(parts.at(0)->dim()), parts_(std::move(parts)) {}

  std::string name() const override { return "intersection(" + join(parts_) + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    MatAffine total(dim(), dim());
    Affine ttot;
    for (const ConePtr& p : parts_) {
      MatAffine Vj = prog.symmetric(dim());
      Affine tj = prog.scalar();
      p->emit(prog, Vj, tj);
      total += Vj;
      ttot += tj;
    }
    prog.add_psd(total - V);
    prog.add_leq(ttot, tau);
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    for (const ConePtr& p : parts_) {
      Program probe;
      if (!p->majorant(probe)) return std::nullopt;
    }
    Majorant out{MatAffine(dim(), dim()), Affine()};
    for (const ConePtr& p : parts_) {
      Majorant m = *p->majorant(prog);
      out.V += m.V;
      out.tau += m.tau;
    }
    return out;
  }

  static std::string join(const std::vector<ConePtr>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i]->name();
    return s;
  }

 private:
  std::vector<ConePtr> parts_;
};

class ConvexHullCone final : public CompatCone {
 public:
  explicit ConvexHullCone(std::vector<ConePtr> parts) : CompatCone(parts.at(0)->dim()), parts_(std::move(parts)) {}

  std::string name() const override { return "convex_hull(" + IntersectionCone::join(parts_) + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    for (const ConePtr& p : parts_) p->emit(prog, V, tau);
  }

  double min_tau(const Mat& V) const override {
    double t = 0.0;
    for (const ConePtr& p : parts_) t = std::max(t, p->min_tau(V));
    return t;
  }

 private:
  std::vector<ConePtr> parts_;
};

class ProductCone final : public CompatCone {
 public:
  explicit ProductCone(std::vector<ConePtr> parts) : CompatCone(total_dim(parts)), parts_(std::move(parts)) {}

  std::string name() const override { return "product(" + IntersectionCone::join(parts_) + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    std::vector<MatAffine> blocks;
    Affine ttot;
    for (const ConePtr& p : parts_) {
      MatAffine Vj = prog.symmetric(p->dim());
      Affine tj = prog.scalar();
      p->emit(prog, Vj, tj);
      blocks.push_back(Vj);
      ttot += tj;
    }
    prog.add_psd(MatAffine::block_diag(blocks) - V);
    prog.add_leq(ttot, tau);
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    for (const ConePtr& p : parts_) {
      Program probe;
      if (!p->majorant(probe)) return std::nullopt;
    }
    std::vector<MatAffine> blocks;
    Affine ttot;
    for (const ConePtr& p : parts_) {
      Majorant m = *p->majorant(prog);
      blocks.push_back(m.V);
      ttot += m.tau;
    }
    return Majorant{MatAffine::block_diag(blocks), ttot};
  }

 private:
  static int total_dim(const std::vector<ConePtr>& parts) {
    int n = 0;
    for (const ConePtr& p : parts) n += p->dim();
    return n;
  }

  std::vector<ConePtr> parts_;
};

class LinearImageCone final : public CompatCone {
 public:
  LinearImageCone(ConePtr inner, Mat M) : CompatCone(static_cast<int>(M.rows())), inner_(std::move(inner)), M_(std::move(M)) {}

  std::string name() const override { return "linear_image(" + inner_->name() + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    inner_->emit(prog, congruence(M_, V), tau);
  }

  double min_tau(const Mat& V) const override {
    check_square(V, dim(), "linear image cone");
    if (min_eig(V) < -1e-12 * std::max(1.0, V.cwiseAbs().maxCoeff())) return kInf;
    return inner_->min_tau(M_.transpose() * V * M_);
  }

 private:
  ConePtr inner_;
  Mat M_;
};

class InverseImageCone final : public CompatCone {
 public:
  InverseImageCone(ConePtr inner, Mat P) : CompatCone(static_cast<int>(P.cols())), inner_(std::move(inner)), P_(std::move(P)) {}

  std::string name() const override { return "inverse_image(" + inner_->name() + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    add_psd_member(prog, V);
    MatAffine W = prog.symmetric(inner_->dim());
    inner_->emit(prog, W, tau);
    prog.add_psd(congruence(P_, W) - V);
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    Program probe;
    if (!inner_->majorant(probe)) return std::nullopt;
    Majorant m = *inner_->majorant(prog);
    return Majorant{congruence(P_, m.V), m.tau};
  }

 private:
  ConePtr inner_;
  Mat P_;
};

class WidenedCone final : public CompatCone {
 public:
  explicit WidenedCone(ConePtr inner) : CompatCone(inner->dim()), inner_(std::move(inner)) {}

  std::string name() const override { return "widen(" + inner_->name() + ")"; }

  void emit(Program& prog, const MatAffine& V, const Affine& tau) const override {
    inner_->emit(prog, V, 0.25 * tau);
  }

  std::optional<Majorant> majorant(Program& prog) const override {
    std::optional<Majorant> m = inner_->majorant(prog);
    if (m) m->tau = 4.0 * m->tau;
    return m;
  }

  double min_tau(const Mat& V) const override { return 4.0 * inner_->min_tau(V); }

 private:
  ConePtr inner_;
};

void require_parts(const std::vector<ConePtr>& parts, const char* who) {
  if (parts.empty()) throw std::invalid_argument(std::string(who) + ": no operands");
  for (const ConePtr& p : parts) {
    if (!p) throw std::invalid_argument(std::string(who) + ": null operand");
  }
}

void require_same_dim(const std::vector<ConePtr>& parts, const char* who) {
  require_parts(parts, who);
  for (const ConePtr& p : parts) {
    if (p->dim() != parts[0]->dim()) throw std::invalid_argument(std::string(who) + ": operand dimensions differ");
  }
}

}  // namespace

MatAffine emit_spectratope_lifting(Program& prog, const Spectratope& s, Affine& t) {
  const int k = s.ydim();
  MatAffine S(k, k);
  std::vector<Affine> traces;
  for (const std::vector<Mat>& R : s.R) {
    const int d = static_cast<int>(R[0].rows());
    MatAffine Lam = prog.symmetric(d);
    prog.add_psd(Lam);
    traces.push_back(Lam.trace());
    std::vector<bool> nz(k);
    for (int i = 0; i < k; ++i) nz[i] = R[i].cwiseAbs().maxCoeff() != 0.0;
    for (int i = 0; i < k; ++i) {
      if (!nz[i]) continue;
      for (int j = i; j < k; ++j) {
        if (!nz[j]) continue;
        Mat p = R[i] * R[j];
        p = (0.5 * (p + p.transpose())).eval();
        Affine e = inner(p, Lam);
        S.add(i, j, e);
        if (i != j) S.add(j, i, e);
      }
    }
  }
  t = prog.scalar();
  s.calR.emit_phi_leq(prog, traces, t);
  return S;
}

MatAffine emit_ellitope_lifting(Program& prog, const Ellitope& e, Affine& t) {
  const int k = static_cast<int>(e.M.cols());
  MatAffine S(k, k);
  std::vector<Affine> lam = prog.vector(static_cast<int>(e.R.size()));
  for (std::size_t l = 0; l < e.R.size(); ++l) {
    prog.add_nonneg(lam[l]);
    const Mat& R = e.R[l];
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) {
        if (R(i, j) != 0.0) S.add(i, j, R(i, j) * lam[l]);
      }
    }
  }
  t = prog.scalar();
  e.calR.emit_phi_leq(prog, lam, t);
  return S;
}

std::optional<QuadraticLifting> emit_quadratic_lifting(Program& prog, const SignalSet& set) {
  QuadraticLifting q;
  if (std::optional<Ellitope> e = ellitopic_form(set)) {
    q.M = e->M;
    q.S = emit_ellitope_lifting(prog, *e, q.t);
    return q;
  }
  if (const Spectratope* s = set.as<Spectratope>()) {
    q.M = s->M;
    q.S = emit_spectratope_lifting(prog, *s, q.t);
    return q;
  }
  return std::nullopt;
}

void CompatCone::emit_from_majorant(Program& prog, const MatAffine& V, const Affine& tau) const {
  std::optional<Majorant> m = majorant(prog);
  if (!m) throw std::logic_error("cone has no majorant");
  add_psd_member(prog, V);
  prog.add_psd(m->V - V);
  prog.add_leq(m->tau, tau);
}

bool CompatCone::contains(const Mat& V, double tau, double tol) const {
  check_square(V, dim(), "cone membership");
  Program prog;
  emit(prog, MatAffine(V), Affine(tau));
  return conic::check_membership(prog, tol);
}

double CompatCone::min_tau(const Mat& V) const {
  check_square(V, dim(), "cone min_tau");
  if (min_eig(V) < -1e-12 * std::max(1.0, V.cwiseAbs().maxCoeff())) return kInf;
  Program prog;
  Affine t = prog.scalar();
  emit(prog, MatAffine(V), t);
  prog.minimize(t);
  conic::Solution sol = conic::solve(prog);
  if (sol.status == conic::Status::Infeasible) return kInf;
  if (!sol.optimal() && !(sol.status == conic::Status::MaxIterations && sol.relative_gap < 1e-6)) {
    throw std::runtime_error("cone min_tau: solver returned " + conic::to_string(sol.status));
  }
  return round_up(std::max(sol.primal_objective, sol.dual_objective));
}

ConePtr spectratope_cone(const Spectratope& s) { return std::make_shared<SpectratopeCone>(s); }

ConePtr ellitope_cone(const Ellitope& e) { return std::make_shared<EllitopeCone>(e); }

ConePtr absolute_norm_cone(int N, double s, std::optional<double> q, AbsNormForm form) {
  if (N <= 0) throw std::invalid_argument("absolute norm cone: dimension must be positive");
  if (!(s >= 1.0)) throw std::invalid_argument("absolute norm cone: s must be in [1, inf]");
  const double qmin = std::isinf(s) ? kInf : std::max(1.0, s / 2.0);
  const double qq = q.value_or(qmin);
  if (!(qq >= qmin)) {
    throw std::invalid_argument("absolute norm cone: l_" + fmt(qq) + " does not fit l_" + fmt(s));
  }
  const bool diag_ok = s >= 2.0 && qq == qmin;
  if (form == AbsNormForm::Diagonal && !diag_ok) {
    throw std::invalid_argument("absolute norm cone: diagonal form needs s >= 2 and q = s/2");
  }
  if (form == AbsNormForm::Auto) {
    if (s == 1.0 && qq == 1.0) {
      form = AbsNormForm::Auto;
    } else {
      form = diag_ok ? AbsNormForm::Diagonal : AbsNormForm::General;
    }
  }
  auto cone = std::make_shared<AbsNormCone>(N, s, qq, form);
  Program probe;
  cone->emit(probe, probe.symmetric(N), probe.scalar());  // surfaces unsupported exponents now
  return cone;
}

ConePtr intersection_cone(std::vector<ConePtr> parts) {
  require_same_dim(parts, "intersection cone");
  if (parts.size() == 1) return parts[0];
  return std::make_shared<IntersectionCone>(std::move(parts));
}

ConePtr convex_hull_cone(std::vector<ConePtr> parts) {
  require_same_dim(parts, "convex hull cone");
  const Mat I = Mat::Identity(parts[0]->dim(), parts[0]->dim());
  for (const ConePtr& p : parts) {
    if (!std::isfinite(p->min_tau(I))) {
      throw std::invalid_argument("convex hull cone: operand " + p->name() + " has no member with V = I");
    }
  }
  if (parts.size() == 1) return parts[0];
  return std::make_shared<ConvexHullCone>(std::move(parts));
}

ConePtr product_cone(std::vector<ConePtr> parts) {
  require_parts(parts, "product cone");
  return std::make_shared<ProductCone>(std::move(parts));
}

ConePtr linear_image_cone(ConePtr inner, Mat M) {
  if (!inner) throw std::invalid_argument("linear image cone: null operand");
  if (M.cols() != inner->dim()) throw std::invalid_argument("linear image cone: map columns must equal operand dimension");
  return std::make_shared<LinearImageCone>(std::move(inner), std::move(M));
}

ConePtr inverse_image_cone(ConePtr inner, Mat P) {
  if (!inner) throw std::invalid_argument("inverse image cone: null operand");
  if (P.rows() != inner->dim()) throw std::invalid_argument("inverse image cone: map rows must equal operand dimension");
  Eigen::ColPivHouseholderQR<Mat> qr(P);
  qr.setThreshold(1e-12);
  if (qr.rank() != P.cols()) throw std::invalid_argument("inverse image cone: map has a nontrivial kernel");
  return std::make_shared<InverseImageCone>(std::move(inner), std::move(P));
}

ConePtr sum_cone(std::vector<ConePtr> parts) {
  require_same_dim(parts, "sum cone");
  const int N = parts[0]->dim();
  const int k = static_cast<int>(parts.size());
  Mat S(N, N * k);
  for (int j = 0; j < k; ++j) S.middleCols(j * N, N) = Mat::Identity(N, N);
  return linear_image_cone(product_cone(std::move(parts)), S);
}

ConePtr widen_cone(ConePtr inner) {
  if (!inner) throw std::invalid_argument("widen cone: null operand");
  return std::make_shared<WidenedCone>(std::move(inner));
}

ConePtr compatible_cone(const SignalSet& set) {
  const int n = set.dim();
  if (const Box* b = set.as<Box>()) {
    Vec h = b->lower.cwiseAbs().cwiseMax(b->upper.cwiseAbs());
    return ellitope_cone(*ellitopic_form(make_box(-h, h)));
  }
  if (std::optional<Ellitope> e = ellitopic_form(set)) return ellitope_cone(*e);
  if (const ScaledBall* sb = set.as<ScaledBall>()) {
    ConePtr base = absolute_norm_cone(n, sb->p);
    if ((sb->gamma.array() == 1.0).all()) return base;
    return inverse_image_cone(base, Mat(sb->gamma.asDiagonal()));
  }
  if (set.as<Simplex>()) return absolute_norm_cone(n, 1.0);
  if (const Spectratope* s = set.as<Spectratope>()) return spectratope_cone(*s);
  if (const LinearImage* li = set.as<LinearImage>()) return linear_image_cone(compatible_cone(li->inner), li->M);
  if (const Intersection* in = set.as<Intersection>()) {
    std::vector<ConePtr> parts;
    for (const SignalSet& p : in->parts) parts.push_back(compatible_cone(p));
    return intersection_cone(std::move(parts));
  }
  if (const Symmetrized* sy = set.as<Symmetrized>()) return compatible_cone(sy->inner);
  throw std::invalid_argument("no compatible cone for set kind " + set.kind_name());
}

}  // namespace polyest
