#pragma once

#include "polyest/sets.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace polyest {

// Member (V, tau) of a cone that dominates every member: V in cone iff 0 <= V <= V_major for some
// auxiliaries with tau_major <= tau.
struct Majorant {
  MatAffine V;
  Affine tau;
};

// Cone Y in S^N_+ x R_+ compatible with a set: (V, tau) in Y implies y'Vy <= tau on the set.
class CompatCone {
 public:
  explicit CompatCone(int dim) : dim_(dim) {}
  virtual ~CompatCone() = default;

  int dim() const { return dim_; }
  virtual std::string name() const = 0;
  // Constrains (V, tau) to the cone, V >= 0 included; auxiliaries are fresh variables of prog.
  virtual void emit(Program& prog, const MatAffine& V, const Affine& tau) const = 0;
  virtual std::optional<Majorant> majorant(Program& /*prog*/) const { return std::nullopt; }

  bool contains(const Mat& V, double tau, double tol = 1e-6) const;
  // Smallest tau with (V, tau) in the cone; +inf when no such tau exists.
  virtual double min_tau(const Mat& V) const;

 protected:
  void emit_from_majorant(Program& prog, const MatAffine& V, const Affine& tau) const;

 private:
  int dim_;
};

using ConePtr = std::shared_ptr<const CompatCone>;

// {(V,tau): M'VM <= sum_l R*_l[Lambda_l], phi_R(Tr Lambda) <= tau}
ConePtr spectratope_cone(const Spectratope& s);
// {(V,tau): M'VM <= sum_l lambda_l R_l, phi_R(lambda) <= tau}
ConePtr ellitope_cone(const Ellitope& e);

enum class AbsNormForm { Auto, General, Diagonal };
// Cone compatible with the unit l_s ball in R^N built from the fitting norm l_q, q >= max(1, s/2).
// Auto picks the closed form for s = 1, the diagonal form for s >= 2 with q = s/2, else the (W, w) form.
ConePtr absolute_norm_cone(int N, double s, std::optional<double> q = std::nullopt, AbsNormForm form = AbsNormForm::Auto);

ConePtr intersection_cone(std::vector<ConePtr> parts);
ConePtr convex_hull_cone(std::vector<ConePtr> parts);
ConePtr product_cone(std::vector<ConePtr> parts);
// Cone for M Y given a cone for Y.
ConePtr linear_image_cone(ConePtr inner, Mat M);
// Cone for {y : P y in Y} given a cone for Y; P must have a trivial kernel.
ConePtr inverse_image_cone(ConePtr inner, Mat P);
// Cone for Y_1 + ... + Y_k.
ConePtr sum_cone(std::vector<ConePtr> parts);
// {(V, tau) : (V, tau/4) in Y}
ConePtr widen_cone(ConePtr inner);

// sum_l R*_l[Lambda_l] over fresh Lambda_l >= 0, with t a fresh scalar bounding phi_R(Tr Lambda_1, ..., Tr Lambda_L).
MatAffine emit_spectratope_lifting(Program& prog, const Spectratope& s, Affine& t);
// sum_l lambda_l R_l over fresh lambda >= 0, with t bounding phi_R(lambda).
MatAffine emit_ellitope_lifting(Program& prog, const Ellitope& e, Affine& t);

// For a set {x = M y : y in Y} with Y an ellitope or spectratope: S and t with y'Sy <= t on Y.
struct QuadraticLifting {
  Mat M;
  MatAffine S;
  Affine t;
};
// Prefers the ellitope form when the set has one; nullopt for other sets.
std::optional<QuadraticLifting> emit_quadratic_lifting(Program& prog, const SignalSet& set);

// Compatible cone for a supported signal set (also compatible with its symmetrization).
ConePtr compatible_cone(const SignalSet& set);

}  // namespace polyest
