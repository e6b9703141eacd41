// Copyright 2026 The mdetect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "mdetect/harness.hpp"
#include "mdetect/learner.hpp"
#include "mdetect/synth.hpp"
#include "mdetect/vectorizer.hpp"

namespace {

using namespace mdetect;

const Corpus& corpus() {
  static const Corpus c = [] {
    SynthConfig sc;
    sc.n_binaries = 2000;
    sc.n_weeks = 8;
    return synth_corpus(sc);
  }();
  return c;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const auto spec = VectorizerSpec::from_header(corpus().header);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& h = corpus().histories[i++ % corpus().histories.size()];
    benchmark::DoNotOptimize(extract_rendered(h.first(), spec));
  }
}
BENCHMARK(BM_ExtractFeatures);

void BM_FeatureCatalog(benchmark::State& state) {
  const auto spec = VectorizerSpec::from_header(corpus().header);
  for (auto _ : state) benchmark::DoNotOptimize(FeatureCatalog(corpus(), spec).size());
}
BENCHMARK(BM_FeatureCatalog)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 4 * n;
  std::mt19937_64 rng(1);
  std::vector<TrainingExample> examples(n);
  for (auto& ex : examples) {
    ex.x.dims = static_cast<std::uint32_t>(d);
    for (std::uint32_t k = 0; k < d; ++k)
      if (rng() % 100 < 2) ex.x.active.push_back(k);
    ex.y = rng() % 2 ? 1 : -1;
  }
  Hyperparams hp;
  for (auto _ : state) benchmark::DoNotOptimize(train(examples, d, hp).model.w.data());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Train)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Roc(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<ScoredLabel> scores(static_cast<std::size_t>(state.range(0)));
  for (auto& s : scores) {
    s.malicious = rng() % 2;
    s.score = z(rng) + (s.malicious ? 1.0 : 0.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(detection_at_fpr(roc(scores), 0.01));
}
BENCHMARK(BM_Roc)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_TemporalLabelExperiment(benchmark::State& state) {
  ExperimentConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(corpus(), cfg).periods.size());
}
BENCHMARK(BM_TemporalLabelExperiment)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
