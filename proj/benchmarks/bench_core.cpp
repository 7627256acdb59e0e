#include "ifv/dual.hpp"
#include "ifv/generator.hpp"
#include "ifv/kernels.hpp"
#include "ifv/particles.hpp"

#include <benchmark/benchmark.h>

using namespace ifv;

namespace {

ModelSpec pim_model(int types, int colonies) {
  ModelSpec m = neutral_spec(types, make_kernel(CompleteUniform{colonies}), 1.0);
  m.mutation = MutationGenerator::parent_independent(1.0, Vec::Constant(types, 1.0 / types));
  m.fitness.v = Mat::Identity(types, types);
  m.s = 0.5;
  return m;
}

Monomial indicator_power(int colonies, int types, int degree) {
  Monomial F;
  for (int i = 0; i < degree; ++i) F.factors.push_back({i % colonies, Vec::Unit(types, 0)});
  return F;
}

void BM_GeneratorApply(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const auto m = pim_model(4, 3);
  const auto x = Configuration::uniform(3, 4);
  const auto F = indicator_power(3, 4, degree);
  for (auto _ : state) benchmark::DoNotOptimize(generator_apply(m, F, x));
}
BENCHMARK(BM_GeneratorApply)->DenseRange(1, 4);

void BM_SimulateMoran(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const auto m = pim_model(2, 2);
  const auto s = ParticleState::from_configuration(Configuration::uniform(2, 2), N);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_moran(m, s, 0.5, ++seed).times.size());
}
BENCHMARK(BM_SimulateMoran)->RangeMultiplier(4)->Range(16, 256);

void BM_DualExpectation(benchmark::State& state) {
  const auto m = pim_model(2, 1);
  const auto x = Configuration::uniform(1, 2);
  const auto F = indicator_power(1, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dual_expectation(m, F, x, 0.3, 1000, 7).mean);
}
BENCHMARK(BM_DualExpectation)->DenseRange(1, 3);

void BM_BuildGeneratorMatrix(benchmark::State& state) {
  const auto m = pim_model(2, 2);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_generator_matrix(m, N).q.sum());
}
BENCHMARK(BM_BuildGeneratorMatrix)->Arg(6)->Arg(12)->Arg(24);

}  // namespace
BENCHMARK_MAIN();
