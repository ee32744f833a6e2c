#include <benchmark/benchmark.h>

#include "sumer/engine.hpp"
#include "sumer/learners.hpp"
#include "sumer/remediation.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

Dataset sparse_moons(std::size_t n) {
  const auto d = gen_two_moons(MoonsSpec{n, 0.1, 1});
  auto labs = d.labels();
  for (std::size_t i = 0; i < labs.size(); ++i)
    if (i % 50 != 0) labs[i] = LabelRecord::unlabeled(labs[i].truth);
  return d.with_labels(labs);
}

void BM_LabelSpreadKnn(benchmark::State& state) {
  const auto d = sparse_moons(static_cast<std::size_t>(state.range(0)));
  SpreadSpec spec;
  spec.affinity = KnnGraphAffinity{10};
  for (auto _ : state) benchmark::DoNotOptimize(label_spread(d, spec));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LabelSpreadKnn)->RangeMultiplier(2)->Range(250, 4000)->Complexity();

void BM_ForestFit(benchmark::State& state) {
  const auto d = gen_two_moons(MoonsSpec{static_cast<std::size_t>(state.range(0)), 0.2, 2});
  const ClassifierSpec spec{ForestSpec{50, 32, 1, 0, 3}};
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, d));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForestFit)->RangeMultiplier(2)->Range(250, 4000)->Complexity();

void BM_ForestPredict(benchmark::State& state) {
  const auto d = gen_two_moons(MoonsSpec{2000, 0.2, 2});
  const auto m = fit(ClassifierSpec{ForestSpec{50, 32, 1, 0, 3}}, d);
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba(m, d));
}
BENCHMARK(BM_ForestPredict);

void BM_CrossValProba(benchmark::State& state) {
  const auto d = inject_noise(gen_two_moons(MoonsSpec{1000, 0.1, 4}), NoiseSpec{SymmetricFlip{0.2}, 4}).noisy;
  const ClassifierSpec spec{ForestSpec{50, 32, 5, 0, 5}};
  for (auto _ : state) benchmark::DoNotOptimize(cross_val_proba(spec, d, 5, 5));
}
BENCHMARK(BM_CrossValProba);

void BM_StreamExperiment(benchmark::State& state) {
  ExperimentConfig c;
  c.seed = 1;
  c.strategies = {Strategy::Static, Strategy::SUM, Strategy::SUMER, Strategy::Oracle};
  c.data = MoonsSource{2000, 0.1};
  c.seed_noise = NoiseSpec{SymmetricFlip{0.2}, 0};
  c.split.labeled_fraction = 0.025;
  SpreadSpec s;
  s.affinity = KnnGraphAffinity{10};
  c.learner = ClassifierSpec{SpreadLearnerSpec{s}};
  c.gate.tau = 0.7;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c));
}
BENCHMARK(BM_StreamExperiment)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
