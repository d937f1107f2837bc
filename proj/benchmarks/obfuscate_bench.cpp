#include <benchmark/benchmark.h>

#include "obfbench/obfuscate.hpp"
#include "obfbench/synth.hpp"

namespace {

const obfbench::Trace& sample_trace() {
  static const obfbench::Trace t = [] {
    auto spec = obfbench::default_synth_spec();
    spec.n_malware = 1;
    spec.n_goodware = 1;
    return obfbench::generate_corpus(spec, obfbench::default_catalog()).traces.front();
  }();
  return t;
}

void BM_ApplyProfile(benchmark::State& state) {
  obfbench::ObfuscationProfile profile;
  const double p = static_cast<double>(state.range(0)) / 100.0;
  profile.insertion = obfbench::InsertionParams{p, 1, 10};
  profile.reordering = obfbench::ReorderingParams{p, 5, p, 1, 3};
  profile.seed = 42;
  for (auto _ : state)
    benchmark::DoNotOptimize(obfbench::apply_profile(sample_trace(), profile, obfbench::default_catalog()));
}
BENCHMARK(BM_ApplyProfile)->Arg(0)->Arg(50)->Arg(100);

}  // namespace
