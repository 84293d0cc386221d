#include "forge/optim.hpp"

#include <benchmark/benchmark.h>

using namespace forge;

namespace {

void BM_NelderMeadQuadratic(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(dim, -1.0, 2.0);
  auto f = [&](const Eigen::VectorXd& x) { return (x - c).squaredNorm(); };
  SimplexConfig cfg;
  cfg.initial_step = {0.5};
  cfg.f_tol = 1e-12;
  cfg.x_tol = 1e-9;
  cfg.max_evals = 100000;
  for (auto _ : state) {
    const auto res = nelder_mead(f, Eigen::VectorXd::Zero(dim), cfg);
    benchmark::DoNotOptimize(res.f);
  }
}
BENCHMARK(BM_NelderMeadQuadratic)->Arg(4)->Arg(12)->Arg(24);

void BM_NullSpace3xN(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd a(3, n);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::sin(1.7 * i + 0.9 * j) + 0.1 * j;
  for (auto _ : state) benchmark::DoNotOptimize(null_space(a).vectors.cols());
}
BENCHMARK(BM_NullSpace3xN)->Arg(8)->Arg(16)->Arg(30);

}  // namespace
