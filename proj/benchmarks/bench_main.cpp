#include <benchmark/benchmark.h>

#include <vector>

#include "confcurv/curvature.hpp"
#include "confcurv/parallel.hpp"
#include "confcurv/prescribed.hpp"

using namespace confcurv;

namespace {

void BM_ParseExpression(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScalarExpr::parse("-(2*x3^2-1)^2/(2*x3^4)*exp(2*x3^2)", 3));
  }
}
BENCHMARK(BM_ParseExpression);

void BM_Jet2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::string text = "1";
  for (int i = 1; i <= n; ++i) text += "+x" + std::to_string(i) + "^2";
  const ScalarExpr e = ScalarExpr::parse("exp(-(" + text + "))", n);
  const std::vector<double> p(static_cast<std::size_t>(n), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(eval_jet2(e, p));
}
BENCHMARK(BM_Jet2)->Arg(3)->Arg(5)->Arg(8);

void BM_RiemannOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConformalMetric m = ConformalMetric::euclidean(Field(ScalarExpr::parse("1/(1+x1^2)", n)));
  const std::vector<double> p(static_cast<std::size_t>(n), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(riemann_oracle(m, p));
}
BENCHMARK(BM_RiemannOracle)->Arg(3)->Arg(5);

void BM_RiemannDecomposition(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConformalMetric m = ConformalMetric::euclidean(Field(ScalarExpr::parse("1/(1+x1^2)", n)));
  const std::vector<double> p(static_cast<std::size_t>(n), 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(riemann_decomp(m, p));
}
BENCHMARK(BM_RiemannDecomposition)->Arg(3)->Arg(5);

void BM_SolveSingleVariable(benchmark::State& state) {
  const DiagonalTensorField t = DiagonalTensorField::single_variable(
      Field(ScalarExpr::parse("-2*x1^2", 3)), Field(ScalarExpr::parse("4*x1^2-2", 3)), 0);
  const Grid grid({0, 0, 0}, 2.0, static_cast<int>(state.range(0)), {true, false, false});
  for (auto _ : state) benchmark::DoNotOptimize(solve(PrescribedProblem{t, {0, 0, 0}, grid, {}}));
}
BENCHMARK(BM_SolveSingleVariable)->Arg(9)->Arg(33)->Unit(benchmark::kMillisecond);

void BM_SolveQuadratic3D(benchmark::State& state) {
  const QuadraticConstruction q = construct_quadratic_family(1.0, std::vector<double>{0, 0, 0}, 1.0);
  const DiagonalTensorField t = DiagonalTensorField::isotropic(Field(q.f));
  const Grid grid({0, 0, 0}, 1.0, 5);
  set_thread_count(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve(PrescribedProblem{t, {0, 0, 0}, grid, {}}));
  set_thread_count(0);
}
BENCHMARK(BM_SolveQuadratic3D)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
