#pragma once

#include "polyest/conic.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace polyest {

using conic::Affine;
using conic::MatAffine;
using conic::Mat;
using conic::Program;
using conic::Vec;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Downward-monotone parameter set R in R^L_+.
//   Box:     {0 <= r <= upper}
//   Ball:    {r >= 0 : ||Diag(gamma) r||_p <= 1}
//   Simplex: {r >= 0 : weights' r <= 1}
class MonotoneSet {
 public:
  enum class Kind { Box, Ball, Simplex };

  static MonotoneSet box(Vec upper);
  static MonotoneSet unit_box(int dim) { return box(Vec::Ones(dim)); }
  static MonotoneSet ball(Vec gamma, double p);
  static MonotoneSet simplex(Vec weights);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(data_.size()); }
  const Vec& data() const { return data_; }
  double p() const { return p_; }

  // phi(lambda) = max_{r in R} lambda' r for lambda >= 0.
  double phi(const Vec& lambda) const;
  // phi(lambda) <= t for an affine lambda the caller keeps nonnegative.
  void emit_phi_leq(Program& prog, const std::vector<Affine>& lambda, const Affine& t) const;
  void emit_member(Program& prog, const std::vector<Affine>& r) const;
  bool contains(const Vec& r, double tol = 1e-9) const;

 private:
  Kind kind_ = Kind::Box;
  Vec data_;
  double p_ = kInf;
};

class SignalSet;

struct Box {
  Vec lower;
  Vec upper;
};

// {x : ||Diag(gamma) x||_p <= 1}
struct ScaledBall {
  Vec gamma;
  double p;
};

// {x >= 0 : sum x = 1 (or <= 1 when !equality), C x <= d}
struct Simplex {
  int n = 0;
  bool equality = true;
  Mat C;
  Vec d;
};

// {x = M y : y' R_l y <= r_l, r in calR}
struct Ellitope {
  Mat M;
  std::vector<Mat> R;
  MonotoneSet calR;
};

// {x = M y : (sum_i y_i R[l][i])^2 <= r_l I, r in calR}
struct Spectratope {
  Mat M;
  std::vector<std::vector<Mat>> R;
  MonotoneSet calR;
  int ydim() const { return static_cast<int>(M.cols()); }
  Mat block(int l, const Vec& y) const;
};

struct LinearImage;
struct Intersection;
struct Symmetrized;

class SignalSet {
 public:
  struct Node;

  SignalSet(Box b);                // NOLINT(google-explicit-constructor)
  SignalSet(ScaledBall b);         // NOLINT(google-explicit-constructor)
  SignalSet(Simplex s);            // NOLINT(google-explicit-constructor)
  SignalSet(Ellitope e);           // NOLINT(google-explicit-constructor)
  SignalSet(Spectratope s);        // NOLINT(google-explicit-constructor)
  SignalSet(LinearImage l);        // NOLINT(google-explicit-constructor)
  SignalSet(Intersection i);       // NOLINT(google-explicit-constructor)
  SignalSet(Symmetrized s);        // NOLINT(google-explicit-constructor)

  int dim() const;
  const Node& node() const { return *node_; }
  template <class T>
  const T* as() const;
  std::string kind_name() const;
  bool is_symmetric() const;

 private:
  std::shared_ptr<const Node> node_;
};

struct LinearImage {
  Mat M;
  SignalSet inner;
};

struct Intersection {
  std::vector<SignalSet> parts;
};

// (1/2)(inner - inner)
struct Symmetrized {
  SignalSet inner;
};

struct SignalSet::Node {
  std::variant<Box, ScaledBall, Simplex, Ellitope, Spectratope, LinearImage, Intersection, Symmetrized> v;
  int dim = 0;
};

template <class T>
const T* SignalSet::as() const {
  return std::get_if<T>(&node_->v);
}

// Convenience constructors.
SignalSet unit_ball(int n, double p);
SignalSet make_box(const Vec& lower, const Vec& upper);
SignalSet unit_disk_ellitope(int n);
SignalSet box_as_spectratope(int n);

double support_function(const SignalSet& set, const Vec& d);
Vec support_point(const SignalSet& set, const Vec& d);
SignalSet symmetrize(const SignalSet& set);
// Ellitope description of a symmetric box, l_p ball with p >= 2, or ellitope; nullopt otherwise.
std::optional<Ellitope> ellitopic_form(const SignalSet& set);
// Spectratope description of a symmetric box, ellitope, l_p ball with p >= 2, or spectratope; nullopt otherwise.
std::optional<Spectratope> spectratopic_form(const SignalSet& set);
bool contains(const SignalSet& set, const Vec& x, double tol = 1e-6);

// Conic representation: fresh x constrained to the set, or constraints on given x.
std::vector<Affine> emit_point(Program& prog, const SignalSet& set);
void constrain(Program& prog, const SignalSet& set, const std::vector<Affine>& x, int depth = 0);
// h_set(d) <= t for an affine direction d.
void emit_support_leq(Program& prog, const SignalSet& set, const std::vector<Affine>& d, const Affine& t,
                      int depth = 0);

inline constexpr int kMaxNestingDepth = 16;

// Norm on R^nu: either ||.||_r or the norm whose conjugate unit ball is a symmetric set B*.
class NormSpec {
 public:
  static NormSpec lp(double r);
  static NormSpec dual_of(SignalSet unit_ball_star);

  bool is_lp() const { return !ball_; }
  double r() const { return r_; }
  const SignalSet& conjugate_ball() const { return *ball_; }

  double value(const Vec& w) const;
  std::string describe() const;

 private:
  double r_ = 2.0;
  std::shared_ptr<const SignalSet> ball_;
};

}  // namespace polyest
