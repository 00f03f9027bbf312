#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace polyest {

// Deterministic stream keyed by (master seed, stream index).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::mt19937_64& engine() { return engine_; }
  double uniform();
  double normal();
  double rademacher();
  int uniform_index(int n);
  long poisson(double rate);
  long binomial(long trials, double p);
  Eigen::VectorXd normal_vector(int n);
  // Counts of k categorical draws with the given probabilities.
  std::vector<long> multinomial(long k, const Eigen::VectorXd& prob);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace polyest
