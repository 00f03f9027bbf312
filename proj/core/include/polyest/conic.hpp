#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <vector>

namespace polyest::conic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// Scalar affine expression: constant + sum coef * x[var].
struct Term {
  int var;
  double coef;
};

struct Affine {
  std::vector<Term> terms;
  double constant = 0.0;

  Affine() = default;
  Affine(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static Affine variable(int id, double coef = 1.0);

  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(double a);
  void compact();
};

Affine operator+(Affine a, const Affine& b);
Affine operator-(Affine a, const Affine& b);
Affine operator-(Affine a);
Affine operator*(double s, Affine a);
Affine operator*(Affine a, double s);
Affine dot(const Vec& c, const std::vector<Affine>& x);
Affine sum(const std::vector<Affine>& x);

// Dense-shaped affine matrix expression with a sparse list of variable terms.
struct MatTerm {
  int var;
  int row;
  int col;
  double coef;
};

class MatAffine {
 public:
  MatAffine() = default;
  MatAffine(int rows, int cols);
  explicit MatAffine(const Mat& constant);

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }
  const Mat& constant() const { return constant_; }
  Mat& constant() { return constant_; }
  const std::vector<MatTerm>& terms() const { return terms_; }

  void add_term(int var, int row, int col, double coef);
  void add(int row, int col, const Affine& a);
  Affine operator()(int row, int col) const;
  std::vector<Affine> diagonal() const;
  std::vector<Affine> flatten() const;  // column-major
  Affine trace() const;

  MatAffine transpose() const;
  MatAffine block(int r0, int c0, int nr, int nc) const;
  MatAffine& operator+=(const MatAffine& o);
  MatAffine& operator-=(const MatAffine& o);
  MatAffine& operator*=(double a);
  void compact();

  static MatAffine identity(const Affine& scale, int n);
  static MatAffine diag(const std::vector<Affine>& d);
  static MatAffine column(const std::vector<Affine>& v);
  // Block matrix from a grid; every block in a row shares row count, every block in a column shares column count.
  static MatAffine blocks(const std::vector<std::vector<MatAffine>>& grid);
  static MatAffine block_diag(const std::vector<MatAffine>& parts);

  friend MatAffine operator*(const Mat& left, const MatAffine& x);
  friend MatAffine operator*(const MatAffine& x, const Mat& right);

 private:
  Mat constant_;
  std::vector<MatTerm> terms_;
};

MatAffine operator+(MatAffine a, const MatAffine& b);
MatAffine operator-(MatAffine a, const MatAffine& b);
MatAffine operator*(double s, MatAffine a);
// x' M x for a constant square M, i.e. the congruence transform.
MatAffine congruence(const Mat& m, const MatAffine& x);
Affine inner(const Mat& c, const MatAffine& x);  // trace(c' x)

enum class ConeKind { Nonneg, SecondOrder, Psd };

struct ConeBlock {
  ConeKind kind;
  int offset;  // first row in the stacked slack vector
  int size;    // length in the stacked vector
  int dim;     // matrix order for Psd, equals size otherwise
};

// min c'x  s.t.  G x + s = h, s in K,  A x = b.
// PSD blocks use the lower-triangle column-major svec with sqrt(2) off-diagonal scaling.
struct StandardForm {
  int n = 0;
  Vec c;
  double c0 = 0.0;
  SpMat G;
  Vec h;
  SpMat A;
  Vec b;
  std::vector<ConeBlock> cones;

  int cone_rows() const { return static_cast<int>(h.size()); }
  void write_text(std::ostream& os) const;
};

class Program {
 public:
  int num_variables() const { return nvars_; }

  int new_variable();
  Affine scalar();
  std::vector<Affine> vector(int n);
  MatAffine matrix(int rows, int cols);
  MatAffine symmetric(int n);
  // Symmetric variable scaled by s: entries are s * (fresh variables).
  MatAffine symmetric_scaled(int n, double s);

  void minimize(const Affine& objective) { objective_ = objective; }
  const Affine& objective() const { return objective_; }

  void add_equality(const Affine& e);  // e == 0
  void add_nonneg(const Affine& e);    // e >= 0
  void add_leq(const Affine& a, const Affine& b) { add_nonneg(b - a); }
  void add_soc(const std::vector<Affine>& x);  // x[0] >= ||x[1:]||_2
  // ||x||^2 <= y z with y, z >= 0.
  void add_rotated_soc(const Affine& y, const Affine& z, const std::vector<Affine>& x);
  void add_psd(const MatAffine& m);  // symmetrized before use

  StandardForm compile() const;

  // Copy with every conic constraint relaxed by t * e for a fresh t >= -1; objective becomes t.
  Program relaxed(int* t_index) const;

 private:
  struct Constraint {
    ConeKind kind;
    std::vector<Affine> rows;
    MatAffine psd;
  };
  int nvars_ = 0;
  Affine objective_;
  std::vector<Affine> equalities_;
  std::vector<Constraint> constraints_;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };
std::string to_string(Status s);

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 200;
  bool verbose = false;
};

struct Solution {
  Status status = Status::MaxIterations;
  Vec x;
  Vec y;  // equality multipliers
  Vec z;  // cone multipliers
  Vec s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == Status::Optimal; }
  double value(const Affine& a) const;
  Vec value(const std::vector<Affine>& v) const;
  Mat value(const MatAffine& m) const;
};

Solution solve(const StandardForm& sf, const SolverOptions& opts = {});
Solution solve(const Program& p, const SolverOptions& opts = {});

// Feasibility of the constraints of p (all data substituted as constants or free auxiliaries).
// Solves the relaxed program and accepts when the required relaxation is at most tol.
bool check_membership(const Program& p, double tol = 1e-6);

// Helpers that emit standard cone representations.
// ||x||_p <= t, for p in [1, inf] (rational p with denominator <= 64, or inf).
void add_norm_leq(Program& prog, const std::vector<Affine>& x, const Affine& t, double p);
// u <= (prod args)^(1/N) with N = args.size() a power of two; args are forced nonnegative.
void add_geo_mean_geq(Program& prog, const std::vector<Affine>& args, const Affine& u);
// Returns |v| <= t entrywise helper variables.
std::vector<Affine> add_abs(Program& prog, const std::vector<Affine>& x);

// svec utilities shared with tests.
int svec_size(int n);
Vec svec(const Mat& m);
Mat smat(const Eigen::Ref<const Vec>& v, int n);

}  // namespace polyest::conic
