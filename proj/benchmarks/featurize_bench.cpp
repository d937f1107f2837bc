#include <benchmark/benchmark.h>

#include "obfbench/features.hpp"
#include "obfbench/synth.hpp"

namespace {

const obfbench::Trace& sample_trace() {
  static const obfbench::Trace t = [] {
    auto spec = obfbench::default_synth_spec();
    spec.n_malware = 1;
    spec.n_goodware = 1;
    spec.trace_length = 2000;
    return obfbench::generate_corpus(spec, obfbench::default_catalog()).traces.front();
  }();
  return t;
}

void BM_Featurize(benchmark::State& state) {
  const obfbench::FeatureConfig config{static_cast<std::size_t>(state.range(0)),
                                       state.range(1) ? obfbench::GramMode::unordered
                                                      : obfbench::GramMode::ordered};
  const auto& t = sample_trace();
  for (auto _ : state) benchmark::DoNotOptimize(obfbench::featurize(t, config, obfbench::default_catalog()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.events.size()));
}
BENCHMARK(BM_Featurize)->ArgsProduct({{3, 5, 10}, {0, 1}});

}  // namespace
