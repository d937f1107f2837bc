#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "obfbench/metrics.hpp"

namespace {

std::vector<std::uint16_t> random_seq(std::mt19937_64& gen, std::size_t n) {
  std::vector<std::uint16_t> v(n);
  for (auto& x : v) x = static_cast<std::uint16_t>(gen() % 20);
  return v;
}

void BM_LevenshteinRandom(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_seq(gen, n), b = random_seq(gen, n);
  for (auto _ : state) benchmark::DoNotOptimize(obfbench::levenshtein(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LevenshteinRandom)->RangeMultiplier(2)->Range(64, 4096)->Complexity();

// Obfuscated traces share most of their prefix and suffix with the original.
void BM_LevenshteinSharedAffixes(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_seq(gen, n);
  auto b = a;
  b.insert(b.begin() + static_cast<std::ptrdiff_t>(n / 2), 7);
  for (auto _ : state) benchmark::DoNotOptimize(obfbench::levenshtein(a, b));
}
BENCHMARK(BM_LevenshteinSharedAffixes)->Range(64, 4096);

}  // namespace
