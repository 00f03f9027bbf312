#include "polyest/conic.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace polyest::conic {

namespace {

// p = num/den with den <= 64; throws when p is not such a rational.
std::pair<int, int> rational_exponent(double p) {
  for (int den = 1; den <= 64; ++den) {
    double num = std::round(p * den);
    if (std::abs(num / den - p) <= 1e-10 * std::max(1.0, p)) {
      int n = static_cast<int>(num);
      int g = std::gcd(n, den);
      return {n / g, den / g};
    }
  }
  throw std::invalid_argument("norm exponent " + std::to_string(p) + " is not a small rational");
}

}  // namespace

std::vector<Affine> add_abs(Program& prog, const std::vector<Affine>& x) {
  std::vector<Affine> a = prog.vector(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    prog.add_leq(x[i], a[i]);
    prog.add_leq(-x[i], a[i]);
  }
  return a;
}

void add_geo_mean_geq(Program& prog, const std::vector<Affine>& args, const Affine& u) {
  std::size_t n = args.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("add_geo_mean_geq: size must be a power of two");
  std::vector<Affine> level = args;
  if (n == 1) {
    prog.add_nonneg(level[0]);
    prog.add_leq(u, level[0]);
    return;
  }
  while (level.size() > 1) {
    std::vector<Affine> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      Affine w = prog.scalar();
      prog.add_rotated_soc(level[i], level[i + 1], {w});
      next.push_back(w);
    }
    level.swap(next);
  }
  prog.add_leq(u, level[0]);
}

void add_norm_leq(Program& prog, const std::vector<Affine>& x, const Affine& t, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("add_norm_leq: p must be >= 1");
  if (x.empty()) {
    prog.add_nonneg(t);
    return;
  }
  if (std::isinf(p)) {
    for (const Affine& xi : x) {
      prog.add_leq(xi, t);
      prog.add_leq(-xi, t);
    }
    return;
  }
  if (p == 1.0) {
    prog.add_leq(sum(add_abs(prog, x)), t);
    return;
  }
  if (p == 2.0) {
    std::vector<Affine> rows{t};
    rows.insert(rows.end(), x.begin(), x.end());
    prog.add_soc(rows);
    return;
  }
  // |x_i| <= r_i^(b/a) t^(1-b/a), sum r_i <= t, where p = a/b.
  auto [a, b] = rational_exponent(p);
  int big = 1;
  while (big < a) big <<= 1;
  std::vector<Affine> v = add_abs(prog, x);
  std::vector<Affine> r = prog.vector(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<Affine> args;
    args.reserve(big);
    for (int k = 0; k < b; ++k) args.push_back(r[i]);
    for (int k = b; k < a; ++k) args.push_back(t);
    for (int k = a; k < big; ++k) args.push_back(v[i]);
    add_geo_mean_geq(prog, args, v[i]);
  }
  prog.add_leq(sum(r), t);
}

}  // namespace polyest::conic
