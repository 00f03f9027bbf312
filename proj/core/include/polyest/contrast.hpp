#pragma once

#include "polyest/observation.hpp"

#include <string>

namespace polyest {

// Contrast matrix H (m x N); column j carries its tail norm pi_delta(h_j) <= 1.
struct ContrastMatrix {
  Mat H;
  Vec pi;
  double delta = 0.0;
  std::string provenance;

  int rows() const { return static_cast<int>(H.rows()); }
  int cols() const { return static_cast<int>(H.cols()); }
  bool empty() const { return H.cols() == 0; }

  // Records pi values under ctx; columns with pi > 1 are rescaled onto the unit sphere.
  static ContrastMatrix from_columns(Mat H, const TailNormContext& ctx, std::string provenance);
};

struct RiskCertificate {
  double bound = 0.0;
  double eps = 0.0;
  std::string norm;
  std::string provenance;
};

}  // namespace polyest
