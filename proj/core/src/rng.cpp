#include "polyest/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace polyest {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t a = splitmix64(seed);
  std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

int RngStream::uniform_index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

long RngStream::poisson(double rate) {
  if (rate < 0.0) throw std::invalid_argument("negative Poisson rate");
  if (rate == 0.0) return 0;
  return std::poisson_distribution<long>(rate)(engine_);
}

long RngStream::binomial(long trials, double p) {
  if (p <= 0.0 || trials <= 0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<long>(trials, p)(engine_);
}

Eigen::VectorXd RngStream::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal();
  return v;
}

std::vector<long> RngStream::multinomial(long k, const Eigen::VectorXd& prob) {
  if (prob.size() > 0 && prob.minCoeff() < -1e-12) throw std::invalid_argument("negative probability");
  std::vector<long> counts(prob.size(), 0);
  double rest = prob.cwiseMax(0.0).sum();
  long left = k;
  for (int i = 0; i < prob.size() && left > 0; ++i) {
    double p = std::max(0.0, prob(i));
    if (i + 1 == prob.size() || rest <= p) {
      counts[i] = left;
      left = 0;
      break;
    }
    long c = binomial(left, p / rest);
    counts[i] = c;
    left -= c;
    rest -= p;
  }
  return counts;
}

}  // namespace polyest
