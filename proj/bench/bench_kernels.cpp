// Serial reference vs OpenMP kernels: matrix assembly and off-grid evaluation.
//
//   bench_kernels --benchmark_filter=Assemble
//
// The argument is the lattice size n; node counts grow like 0.52 n^3.

#include "spoint/kernels.hpp"
#include "spoint/lse.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace spoint;

struct Setup {
  VolumeGrid grid;
  std::vector<double> q;
  kernels::Density rho;
  std::vector<Point> points;
};

Setup make_setup(int n) {
  const PotentialField p(RadialProfile::gaussian(-8.0, 1.0));
  Setup s;
  s.grid = build_grid(support_ball(p), n);
  for (const Point& x : s.grid.nodes) s.q.push_back(p(x));
  s.rho = kernels::Density::build(s.grid, 1, s.q);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.8 * s.grid.ball.radius, 0.8 * s.grid.ball.radius);
  for (int i = 0; i < 256; ++i) s.points.emplace_back(u(rng), u(rng), u(rng));
  return s;
}

template <auto Assemble>
void assemble(benchmark::State& state) {
  const Setup s = make_setup(static_cast<int>(state.range(0)));
  Eigen::MatrixXd K;
  for (auto _ : state) {
    Assemble(s.grid, s.q, K);
    benchmark::DoNotOptimize(K.data());
  }
  state.counters["nodes"] = static_cast<double>(s.grid.size());
}

template <auto Evaluate>
void evaluate(benchmark::State& state) {
  const Setup s = make_setup(static_cast<int>(state.range(0)));
  std::vector<double> out(s.points.size());
  for (auto _ : state) {
    Evaluate(s.grid, s.rho, s.points, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["points"] = static_cast<double>(s.points.size());
}

void AssembleSerial(benchmark::State& s) { assemble<&kernels::serial::assemble>(s); }
void AssembleParallel(benchmark::State& s) { assemble<&kernels::parallel::assemble>(s); }
void EvaluateSerial(benchmark::State& s) { evaluate<&kernels::serial::evaluate>(s); }
void EvaluateParallel(benchmark::State& s) { evaluate<&kernels::parallel::evaluate>(s); }

BENCHMARK(AssembleSerial)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(AssembleParallel)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(EvaluateSerial)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(EvaluateParallel)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
