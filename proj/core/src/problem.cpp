#include "polyest/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace polyest {

void EstimationProblem::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (A.cols() != X.dim() || B.cols() != X.dim()) throw std::invalid_argument("A, B and X dimensions disagree");
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("A and B must be finite");
  if (!norm.is_lp() && norm.conjugate_ball().dim() != nu()) {
    throw std::invalid_argument("norm dimension does not match B");
  }
  for (int k = 0; k < 2 * X.dim(); ++k) {
    Vec d = Vec::Unit(X.dim(), k / 2) * (k % 2 ? -1.0 : 1.0);
    if (!std::isfinite(support_function(X, d))) throw std::invalid_argument("set unbounded in direction");
  }
  validate_scheme(scheme, X, A);
}

}  // namespace polyest
