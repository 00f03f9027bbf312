#include "polyest/cones.hpp"
#include "polyest/conic.hpp"
#include "polyest/direct_design.hpp"
#include "polyest/estimator.hpp"
#include "polyest/experiments.hpp"
#include "polyest/sdp_design.hpp"

#include <benchmark/benchmark.h>

using namespace polyest;

namespace {

// min trace(C X) over X psd, trace X = 1
void BM_SdpMinEigen(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(1, n);
  Mat G(n, n);
  for (int k = 0; k < n * n; ++k) G.data()[k] = rng.normal();
  const Mat C = G + G.transpose();
  for (auto _ : state) {
    Program p;
    MatAffine X = p.symmetric(n);
    p.add_psd(X);
    p.add_equality(X.trace() - Affine(1.0));
    p.minimize(inner(C, X));
    benchmark::DoNotOptimize(solve(p));
  }
}
BENCHMARK(BM_SdpMinEigen)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Psi(benchmark::State& state) {
  const int nu = static_cast<int>(state.range(0));
  Vec s(nu), g(nu);
  for (int i = 0; i < nu; ++i) {
    s(i) = 1.0 / (i + 1.0);
    g(i) = 1.0 + 0.1 * i;
  }
  for (auto _ : state) benchmark::DoNotOptimize(psi_bound(s, g, 2.0, 3.0));
}
BENCHMARK(BM_Psi)->Arg(4)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_DiagonalDesign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Vec a(n), d(n), b(n);
  for (int i = 0; i < n; ++i) {
    a(i) = std::pow(i + 1.0, -0.5);
    d(i) = std::pow(i + 1.0, 0.5);
    b(i) = a(i) * std::pow(i + 1.0, -0.75);
  }
  for (auto _ : state) benchmark::DoNotOptimize(diagonal_design(a, d, b, 1e-3, 0.1, 2.0, 2.0));
}
BENCHMARK(BM_DiagonalDesign)->Arg(256)->Arg(2048);

void BM_DirectDesign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  EstimationProblem p{double_integration_matrix(n, 4.0 / n), Mat::Identity(n, n), unit_ball(n, kInf), NormSpec::lp(kInf),
                      SubGaussian{0.01}, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(build_contrast_direct(p));
}
BENCHMARK(BM_DirectDesign)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SdpDesign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  EstimationProblem p{Mat::Identity(n, n), Mat::Identity(n, n), unit_ball(n, 1.0), NormSpec::lp(2.0), SubGaussian{0.05},
                      0.1};
  const ConePtr xc = compatible_cone(p.X);
  const ConePtr uc = compatible_cone(unit_ball(n, 2.0));
  const HCone hc = build_h_cone(z_set(p.scheme, p.eps, n, p.X, p.A), n);
  for (auto _ : state) {
    RngStream rng(2, n);
    benchmark::DoNotOptimize(solve_design_sdp(p, *xc, *uc, hc, rng));
  }
}
BENCHMARK(BM_SdpDesign)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  EstimationProblem p{double_integration_matrix(n, 4.0 / n), Mat::Identity(n, n), unit_ball(n, 2.0), NormSpec::lp(2.0),
                      SubGaussian{0.01}, 0.1};
  const ContrastMatrix H = build_contrast_direct(p).H;
  RngStream rng(3, n);
  const Vec omega = p.A * (0.5 * Vec::Ones(n) / std::sqrt(n)) + 0.01 * rng.normal_vector(n);
  for (auto _ : state) benchmark::DoNotOptimize(polyhedral_estimate(p, H, omega));
}
BENCHMARK(BM_Estimate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
