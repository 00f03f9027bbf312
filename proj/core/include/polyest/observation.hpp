#pragma once

#include "polyest/rng.hpp"
#include "polyest/sets.hpp"

#include <memory>
#include <string>
#include <variant>

namespace polyest {

struct SubGaussian {
  double sigma = 1.0;
};

struct DiscreteScheme {
  long K = 1;
};

struct PoissonScheme {};

using ObservationScheme = std::variant<SubGaussian, DiscreteScheme, PoissonScheme>;

std::string scheme_name(const ObservationScheme& s);

// Checks the scheme's requirements on (X, A); throws std::invalid_argument on violation.
void validate_scheme(const ObservationScheme& s, const SignalSet& X, const Mat& A);

// Tail norm pi_delta: pi(h) <= 1 implies P{|h' xi_x| > 1} <= delta for every x in X.
class TailNormContext {
 public:
  TailNormContext(ObservationScheme scheme, double delta, Mat A, SignalSet X);

  const ObservationScheme& scheme() const { return scheme_; }
  double delta() const { return delta_; }
  double theta() const { return theta_; }
  int m() const { return static_cast<int>(A_.rows()); }
  TailNormContext with_delta(double delta) const { return {scheme_, delta, A_, X_}; }

  double pi(const Vec& h) const;
  // max_{x in X} sum_i [Ax]_i h_i^2
  double quad_term(const Vec& h) const;
  void emit_pi_leq(Program& prog, const std::vector<Affine>& h, const Affine& t) const;

 private:
  ObservationScheme scheme_;
  double delta_;
  Mat A_;
  SignalSet X_;
  double theta_ = 0.0;
  double c_ = 0.0;  // coefficient of theta^2 ||h||_inf^2
};

// Set Z with pi(h) = sqrt(max_{z in Z} sum z_i h_i^2); either {zbar} or a*(A X) + b*Delta_m.
class ZSet {
 public:
  static ZSet singleton(Vec zbar);
  static ZSet image_plus_simplex(double a, double b, Mat A, SignalSet X);

  bool is_singleton() const { return singleton_; }
  const Vec& zbar() const { return zbar_; }
  double a() const { return a_; }
  double b() const { return b_; }
  int m() const { return m_; }

  // phi(r) = max_{z in Z} z' r
  double phi(const Vec& r) const;
  void emit_phi_leq(Program& prog, const std::vector<Affine>& r, const Affine& t) const;
  double pi(const Vec& h) const;

 private:
  bool singleton_ = true;
  int m_ = 0;
  Vec zbar_;
  double a_ = 0.0;
  double b_ = 0.0;
  Mat A_;
  std::shared_ptr<const SignalSet> X_;
};

ZSet z_set(const ObservationScheme& scheme, double eps, int m, const SignalSet& X, const Mat& A);

// xi_x = omega - A x for one draw of the observation.
Vec sample_noise(const ObservationScheme& scheme, const Vec& x, const Mat& A, RngStream& rng);

}  // namespace polyest
