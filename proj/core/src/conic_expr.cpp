#include "polyest/conic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace polyest::conic {

Affine Affine::variable(int id, double coef) {
  Affine a;
  a.terms.push_back({id, coef});
  return a;
}

Affine& Affine::operator+=(const Affine& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  for (const Term& t : o.terms) terms.push_back({t.var, -t.coef});
  constant -= o.constant;
  return *this;
}

Affine& Affine::operator*=(double a) {
  for (Term& t : terms) t.coef *= a;
  constant *= a;
  return *this;
}

void Affine::compact() {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (const Term& t : terms) {
    if (!out.empty() && out.back().var == t.var) {
      out.back().coef += t.coef;
    } else {
      out.push_back(t);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0.0; }),
            out.end());
  terms.swap(out);
}

Affine operator+(Affine a, const Affine& b) { return a += b; }
Affine operator-(Affine a, const Affine& b) { return a -= b; }
Affine operator-(Affine a) { return a *= -1.0; }
Affine operator*(double s, Affine a) { return a *= s; }
Affine operator*(Affine a, double s) { return a *= s; }

Affine dot(const Vec& c, const std::vector<Affine>& x) {
  Affine out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (c(i) != 0.0) out += c(i) * x[i];
  }
  out.compact();
  return out;
}

Affine sum(const std::vector<Affine>& x) {
  Affine out;
  for (const Affine& a : x) out += a;
  out.compact();
  return out;
}

// ---------------------------------------------------------------------------

MatAffine::MatAffine(int rows, int cols) : constant_(Mat::Zero(rows, cols)) {}

MatAffine::MatAffine(const Mat& constant) : constant_(constant) {}

void MatAffine::add_term(int var, int row, int col, double coef) {
  if (coef != 0.0) terms_.push_back({var, row, col, coef});
}

void MatAffine::add(int row, int col, const Affine& a) {
  constant_(row, col) += a.constant;
  for (const Term& t : a.terms) add_term(t.var, row, col, t.coef);
}

Affine MatAffine::operator()(int row, int col) const {
  Affine a(constant_(row, col));
  for (const MatTerm& t : terms_) {
    if (t.row == row && t.col == col) a.terms.push_back({t.var, t.coef});
  }
  a.compact();
  return a;
}

std::vector<Affine> MatAffine::diagonal() const {
  const int n = std::min(rows(), cols());
  std::vector<Affine> d(n);
  for (int i = 0; i < n; ++i) d[i].constant = constant_(i, i);
  for (const MatTerm& t : terms_) {
    if (t.row == t.col) d[t.row].terms.push_back({t.var, t.coef});
  }
  for (Affine& a : d) a.compact();
  return d;
}

std::vector<Affine> MatAffine::flatten() const {
  std::vector<Affine> out(static_cast<std::size_t>(rows()) * cols());
  for (int j = 0; j < cols(); ++j) {
    for (int i = 0; i < rows(); ++i) out[i + j * rows()].constant = constant_(i, j);
  }
  for (const MatTerm& t : terms_) out[t.row + t.col * rows()].terms.push_back({t.var, t.coef});
  for (Affine& a : out) a.compact();
  return out;
}

Affine MatAffine::trace() const {
  Affine a(constant_.trace());
  for (const MatTerm& t : terms_) {
    if (t.row == t.col) a.terms.push_back({t.var, t.coef});
  }
  a.compact();
  return a;
}

MatAffine MatAffine::transpose() const {
  MatAffine out(Mat(constant_.transpose()));
  out.terms_.reserve(terms_.size());
  for (const MatTerm& t : terms_) out.terms_.push_back({t.var, t.col, t.row, t.coef});
  return out;
}

MatAffine MatAffine::block(int r0, int c0, int nr, int nc) const {
  MatAffine out(Mat(constant_.block(r0, c0, nr, nc)));
  for (const MatTerm& t : terms_) {
    if (t.row >= r0 && t.row < r0 + nr && t.col >= c0 && t.col < c0 + nc) {
      out.terms_.push_back({t.var, t.row - r0, t.col - c0, t.coef});
    }
  }
  return out;
}

MatAffine& MatAffine::operator+=(const MatAffine& o) {
  if (o.rows() != rows() || o.cols() != cols()) throw std::invalid_argument("MatAffine: shape mismatch in +");
  constant_ += o.constant_;
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

MatAffine& MatAffine::operator-=(const MatAffine& o) {
  if (o.rows() != rows() || o.cols() != cols()) throw std::invalid_argument("MatAffine: shape mismatch in -");
  constant_ -= o.constant_;
  for (const MatTerm& t : o.terms_) terms_.push_back({t.var, t.row, t.col, -t.coef});
  return *this;
}

MatAffine& MatAffine::operator*=(double a) {
  constant_ *= a;
  for (MatTerm& t : terms_) t.coef *= a;
  return *this;
}

void MatAffine::compact() {
  std::sort(terms_.begin(), terms_.end(), [](const MatTerm& a, const MatTerm& b) {
    if (a.var != b.var) return a.var < b.var;
    if (a.col != b.col) return a.col < b.col;
    return a.row < b.row;
  });
  std::vector<MatTerm> out;
  out.reserve(terms_.size());
  for (const MatTerm& t : terms_) {
    if (!out.empty() && out.back().var == t.var && out.back().row == t.row && out.back().col == t.col) {
      out.back().coef += t.coef;
    } else {
      out.push_back(t);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const MatTerm& t) { return t.coef == 0.0; }),
            out.end());
  terms_.swap(out);
}

MatAffine MatAffine::identity(const Affine& scale, int n) {
  MatAffine out(n, n);
  for (int i = 0; i < n; ++i) out.add(i, i, scale);
  return out;
}

MatAffine MatAffine::diag(const std::vector<Affine>& d) {
  const int n = static_cast<int>(d.size());
  MatAffine out(n, n);
  for (int i = 0; i < n; ++i) out.add(i, i, d[i]);
  return out;
}

MatAffine MatAffine::column(const std::vector<Affine>& v) {
  MatAffine out(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) out.add(static_cast<int>(i), 0, v[i]);
  return out;
}

MatAffine MatAffine::blocks(const std::vector<std::vector<MatAffine>>& grid) {
  if (grid.empty()) return MatAffine(0, 0);
  std::vector<int> roff(grid.size() + 1, 0);
  std::vector<int> coff(grid[0].size() + 1, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != grid[0].size()) throw std::invalid_argument("MatAffine::blocks: ragged grid");
    roff[i + 1] = roff[i] + grid[i][0].rows();
  }
  for (std::size_t j = 0; j < grid[0].size(); ++j) coff[j + 1] = coff[j] + grid[0][j].cols();
  MatAffine out(roff.back(), coff.back());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      const MatAffine& b = grid[i][j];
      if (b.rows() != roff[i + 1] - roff[i] || b.cols() != coff[j + 1] - coff[j]) {
        throw std::invalid_argument("MatAffine::blocks: inconsistent block sizes");
      }
      out.constant_.block(roff[i], coff[j], b.rows(), b.cols()) = b.constant_;
      for (const MatTerm& t : b.terms_) out.terms_.push_back({t.var, t.row + roff[i], t.col + coff[j], t.coef});
    }
  }
  return out;
}

MatAffine MatAffine::block_diag(const std::vector<MatAffine>& parts) {
  int n = 0;
  int m = 0;
  for (const MatAffine& p : parts) {
    n += p.rows();
    m += p.cols();
  }
  MatAffine out(n, m);
  int r = 0;
  int c = 0;
  for (const MatAffine& p : parts) {
    out.constant_.block(r, c, p.rows(), p.cols()) = p.constant_;
    for (const MatTerm& t : p.terms_) out.terms_.push_back({t.var, t.row + r, t.col + c, t.coef});
    r += p.rows();
    c += p.cols();
  }
  return out;
}

MatAffine operator*(const Mat& left, const MatAffine& x) {
  if (left.cols() != x.rows()) throw std::invalid_argument("MatAffine: shape mismatch in left product");
  MatAffine out(Mat(left * x.constant_));
  out.terms_.reserve(x.terms_.size() * static_cast<std::size_t>(left.rows()));
  for (const MatTerm& t : x.terms_) {
    for (int r = 0; r < left.rows(); ++r) {
      const double l = left(r, t.row);
      if (l != 0.0) out.terms_.push_back({t.var, r, t.col, l * t.coef});
    }
  }
  out.compact();
  return out;
}

MatAffine operator*(const MatAffine& x, const Mat& right) {
  if (x.cols() != right.rows()) throw std::invalid_argument("MatAffine: shape mismatch in right product");
  MatAffine out(Mat(x.constant_ * right));
  out.terms_.reserve(x.terms_.size() * static_cast<std::size_t>(right.cols()));
  for (const MatTerm& t : x.terms_) {
    for (int c = 0; c < right.cols(); ++c) {
      const double r = right(t.col, c);
      if (r != 0.0) out.terms_.push_back({t.var, t.row, c, t.coef * r});
    }
  }
  out.compact();
  return out;
}

MatAffine operator+(MatAffine a, const MatAffine& b) { return a += b; }
MatAffine operator-(MatAffine a, const MatAffine& b) { return a -= b; }
MatAffine operator*(double s, MatAffine a) { return a *= s; }

MatAffine congruence(const Mat& m, const MatAffine& x) {
  return Mat(m.transpose()) * (x * m);
}

Affine inner(const Mat& c, const MatAffine& x) {
  Affine a((c.array() * x.constant().array()).sum());
  for (const MatTerm& t : x.terms()) {
    const double v = c(t.row, t.col);
    if (v != 0.0) a.terms.push_back({t.var, v * t.coef});
  }
  a.compact();
  return a;
}

// ---------------------------------------------------------------------------

int svec_size(int n) { return n * (n + 1) / 2; }

namespace {
int svec_index(int i, int j, int n) {
  // lower triangle (i >= j), column-major
  return j * n - j * (j - 1) / 2 + (i - j);
}
}  // namespace

Vec svec(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  Vec v(svec_size(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v(k++) = m(j, j);
    for (int i = j + 1; i < n; ++i) v(k++) = std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

Mat smat(const Eigen::Ref<const Vec>& v, int n) {
  Mat m(n, n);
  int k = 0;
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    m(j, j) = v(k++);
    for (int i = j + 1; i < n; ++i) {
      m(i, j) = r * v(k);
      m(j, i) = m(i, j);
      ++k;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

int Program::new_variable() { return nvars_++; }

Affine Program::scalar() { return Affine::variable(new_variable()); }

std::vector<Affine> Program::vector(int n) {
  std::vector<Affine> v;
  v.reserve(n);
  for (int i = 0; i < n; ++i) v.push_back(scalar());
  return v;
}

MatAffine Program::matrix(int rows, int cols) {
  MatAffine m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m.add_term(new_variable(), i, j, 1.0);
  }
  return m;
}

MatAffine Program::symmetric(int n) { return symmetric_scaled(n, 1.0); }

MatAffine Program::symmetric_scaled(int n, double s) {
  MatAffine m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const int v = new_variable();
      m.add_term(v, i, j, s);
      if (i != j) m.add_term(v, j, i, s);
    }
  }
  return m;
}

void Program::add_equality(const Affine& e) { equalities_.push_back(e); }

void Program::add_nonneg(const Affine& e) {
  Constraint c{ConeKind::Nonneg, {e}, {}};
  constraints_.push_back(std::move(c));
}

void Program::add_soc(const std::vector<Affine>& x) {
  if (x.empty()) throw std::invalid_argument("add_soc: empty cone");
  if (x.size() == 1) {
    add_nonneg(x[0]);
    return;
  }
  constraints_.push_back(Constraint{ConeKind::SecondOrder, x, {}});
}

void Program::add_rotated_soc(const Affine& y, const Affine& z, const std::vector<Affine>& x) {
  std::vector<Affine> rows;
  rows.reserve(x.size() + 2);
  rows.push_back(y + z);
  rows.push_back(y - z);
  for (const Affine& xi : x) rows.push_back(2.0 * xi);
  add_soc(rows);
}

void Program::add_psd(const MatAffine& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("add_psd: matrix not square");
  if (m.rows() == 0) return;
  if (m.rows() == 1) {
    add_nonneg(m(0, 0));
    return;
  }
  constraints_.push_back(Constraint{ConeKind::Psd, {}, m});
}

StandardForm Program::compile() const {
  StandardForm sf;
  sf.n = nvars_;
  sf.c = Vec::Zero(nvars_);
  for (const Term& t : objective_.terms) sf.c(t.var) += t.coef;
  sf.c0 = objective_.constant;

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> gt;
  std::vector<double> h;

  // Nonnegative rows first, merged into a single block.
  int lp = 0;
  for (const Constraint& c : constraints_) {
    if (c.kind != ConeKind::Nonneg) continue;
    for (const Affine& a : c.rows) {
      for (const Term& t : a.terms) gt.emplace_back(lp, t.var, -t.coef);
      h.push_back(a.constant);
      ++lp;
    }
  }
  if (lp > 0) sf.cones.push_back({ConeKind::Nonneg, 0, lp, lp});

  int row = lp;
  for (const Constraint& c : constraints_) {
    if (c.kind == ConeKind::SecondOrder) {
      const int q = static_cast<int>(c.rows.size());
      for (int k = 0; k < q; ++k) {
        for (const Term& t : c.rows[k].terms) gt.emplace_back(row + k, t.var, -t.coef);
        h.push_back(c.rows[k].constant);
      }
      sf.cones.push_back({ConeKind::SecondOrder, row, q, q});
      row += q;
    } else if (c.kind == ConeKind::Psd) {
      const int d = c.psd.rows();
      const int sz = svec_size(d);
      const Vec hc = svec(c.psd.constant());
      for (int k = 0; k < sz; ++k) h.push_back(hc(k));
      const double r2 = std::sqrt(2.0);
      for (const MatTerm& t : c.psd.terms()) {
        const int i = std::max(t.row, t.col);
        const int j = std::min(t.row, t.col);
        const double w = (i == j) ? t.coef : 0.5 * r2 * t.coef;
        gt.emplace_back(row + svec_index(i, j, d), t.var, -w);
      }
      sf.cones.push_back({ConeKind::Psd, row, sz, d});
      row += sz;
    }
  }
  sf.G.resize(row, nvars_);
  sf.G.setFromTriplets(gt.begin(), gt.end());
  sf.G.prune(0.0);
  sf.h = Eigen::Map<Vec>(h.data(), static_cast<Eigen::Index>(h.size()));

  std::vector<Trip> at;
  const int p = static_cast<int>(equalities_.size());
  sf.b.resize(p);
  for (int k = 0; k < p; ++k) {
    for (const Term& t : equalities_[k].terms) at.emplace_back(k, t.var, t.coef);
    sf.b(k) = -equalities_[k].constant;
  }
  sf.A.resize(p, nvars_);
  sf.A.setFromTriplets(at.begin(), at.end());
  sf.A.prune(0.0);
  return sf;
}

Program Program::relaxed(int* t_index) const {
  Program out = *this;
  const int t = out.new_variable();
  const Affine tv = Affine::variable(t);
  for (Constraint& c : out.constraints_) {
    if (c.kind == ConeKind::Nonneg) {
      for (Affine& a : c.rows) a += tv;
    } else if (c.kind == ConeKind::SecondOrder) {
      c.rows[0] += tv;
    } else {
      for (int i = 0; i < c.psd.rows(); ++i) c.psd.add_term(t, i, i, 1.0);
    }
  }
  out.add_nonneg(tv + 1.0);
  out.minimize(tv);
  if (t_index) *t_index = t;
  return out;
}

void StandardForm::write_text(std::ostream& os) const {
  os << "vars " << n << "\n";
  os << "cones";
  for (const ConeBlock& c : cones) {
    const char* k = c.kind == ConeKind::Nonneg ? "l" : (c.kind == ConeKind::SecondOrder ? "q" : "s");
    os << ' ' << k << ':' << c.dim;
  }
  os << "\nc";
  for (int i = 0; i < n; ++i) os << ' ' << c(i);
  os << "\nG " << G.rows() << ' ' << G.cols() << ' ' << G.nonZeros() << "\n";
  for (int k = 0; k < G.outerSize(); ++k) {
    for (SpMat::InnerIterator it(G, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << "\n";
  }
  os << "h";
  for (int i = 0; i < h.size(); ++i) os << ' ' << h(i);
  os << "\nA " << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << "\n";
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << "\n";
  }
  os << "b";
  for (int i = 0; i < b.size(); ++i) os << ' ' << b(i);
  os << "\n";
}

// ---------------------------------------------------------------------------

double Solution::value(const Affine& a) const {
  double v = a.constant;
  for (const Term& t : a.terms) v += t.coef * x(t.var);
  return v;
}

Vec Solution::value(const std::vector<Affine>& v) const {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = value(v[i]);
  return out;
}

Mat Solution::value(const MatAffine& m) const {
  Mat out = m.constant();
  for (const MatTerm& t : m.terms()) out(t.row, t.col) += t.coef * x(t.var);
  return out;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIterations: return "max-iter";
  }
  return "unknown";
}

}  // namespace polyest::conic
