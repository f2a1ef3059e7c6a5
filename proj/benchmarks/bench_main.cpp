#include <benchmark/benchmark.h>

#include "fbrrt/backward.hpp"
#include "fbrrt/forward.hpp"
#include "fbrrt/problem.hpp"

namespace {

using namespace fbrrt;

Vector random_state(const Box& box, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(box.dim());
  for (int j = 0; j < box.dim(); ++j) x(j) = box.lower(j) + (box.upper(j) - box.lower(j)) * u(rng);
  return x;
}

void BM_NearestBruteForce(benchmark::State& state) {
  const SocProblem p = make_quadcopter();
  const auto& roi = p.region_of_interest;
  Rng rng(1);
  std::vector<Vector> pts;
  for (int j = 0; j < state.range(0); ++j) pts.push_back(random_state(roi, rng));
  const Vector q = random_state(roi, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nearest(pts, q, roi.half_width()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NearestBruteForce)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oN);

void BM_NearestIndex(benchmark::State& state) {
  const SocProblem p = make_quadcopter();
  const auto& roi = p.region_of_interest;
  Rng rng(1);
  NearestIndex index(roi.half_width());
  for (int j = 0; j < state.range(0); ++j) index.add(random_state(roi, rng));
  const Vector q = random_state(roi, rng);
  for (auto _ : state) benchmark::DoNotOptimize(index.query(q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NearestIndex)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oN);

BranchTree first_tree(const SocProblem& p, int width, int steps) {
  ForwardConfig cfg;
  cfg.roi = p.region_of_interest;
  cfg.eps_rrt = 1.0;
  cfg.eps_opt = 0.0;
  BranchTree tree(p.initial_state, steps, p.horizon / steps);
  Rng rng(2);
  forward_pass(tree, nullptr, p, cfg, width, rng);
  return tree;
}

void BM_ForwardPass(benchmark::State& state) {
  const SocProblem p = make_double_integrator();
  const int width = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(first_tree(p, width, 64).live_count());
  state.SetComplexityN(width);
}
BENCHMARK(BM_ForwardPass)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_BackwardPass(benchmark::State& state) {
  const SocProblem p = state.range(1) == 0 ? make_double_integrator() : make_quadcopter();
  const BranchTree tree = first_tree(p, static_cast<int>(state.range(0)), 64);
  const ChebyshevBasis basis = ChebyshevBasis::from_region(p.region_of_interest);
  BackwardConfig cfg;
  cfg.lambda = state.range(1) == 0 ? 1.0 : 300.0;
  for (auto _ : state) benchmark::DoNotOptimize(backward_pass(tree, p, basis, cfg).lambda);
}
BENCHMARK(BM_BackwardPass)
    ->Args({512, 0})
    ->Args({1024, 0})
    ->Args({1024, 1})
    ->Unit(benchmark::kMillisecond);

void BM_WeightedFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const ChebyshevBasis basis(Vector::Zero(n), Vector::Ones(n));
  const Box box{Vector::Constant(n, -1), Vector::Constant(n, 1)};
  Rng rng(3);
  const auto m = state.range(0);
  Matrix phi(m, basis.num_features());
  Vector y(m);
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    phi.row(j) = basis.features(random_state(box, rng)).transpose();
    y(j) = phi.row(j).sum();
  }
  for (auto _ : state) benchmark::DoNotOptimize(weighted_fit(phi, y, w, 0.0).residual_norm);
}
BENCHMARK(BM_WeightedFit)->Args({1024, 2})->Args({1024, 4})->Args({1024, 8})->Args({4096, 8});

}  // namespace

BENCHMARK_MAIN();
