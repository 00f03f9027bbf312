#pragma once

#include "polyest/observation.hpp"
#include "polyest/sets.hpp"

namespace polyest {

// omega = A x + xi, x in X; estimate w = B x in the given norm with reliability eps.
struct EstimationProblem {
  Mat A;
  Mat B;
  SignalSet X;
  NormSpec norm;
  ObservationScheme scheme;
  double eps = 0.1;

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }
  int nu() const { return static_cast<int>(B.rows()); }

  // Throws std::invalid_argument describing the first violated requirement.
  void validate() const;
  SignalSet Xs() const { return symmetrize(X); }
  TailNormContext tail_context(double delta) const { return {scheme, delta, A, X}; }
};

}  // namespace polyest
