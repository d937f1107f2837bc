#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "obfbench/catalog.hpp"
#include "obfbench/trace.hpp"

namespace obfbench {

/// Parameters of a synthetic labeled corpus. The name universe comes from
/// the catalog passed alongside.
struct SynthSpec {
  std::size_t n_malware = 100;
  std::size_t n_goodware = 100;
  std::size_t trace_length = 500;
  /// 0 = both classes share one chain; 1 = fully independent chains.
  double divergence = 0.6;
  std::uint64_t seed = 7;

  /// Throws SpecError when a count is zero or divergence is outside [0, 1].
  void validate() const;
};

/// Row-stochastic transition matrix, stored row-major.
struct TransitionMatrix {
  std::size_t states = 0;
  std::vector<double> p;

  [[nodiscard]] double at(std::size_t from, std::size_t to) const { return p[from * states + to]; }
  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

struct ClassChains {
  TransitionMatrix malware;
  TransitionMatrix goodware;
};

/// The two first-order chains the corpus is sampled from.
[[nodiscard]] ClassChains build_chains(const SynthSpec& spec, const Catalog& catalog);

/**
 * Sample n_malware + n_goodware traces of exactly trace_length events.
 * Trace i draws from its own substream of the seed, so the corpus does not
 * depend on generation order. Side-effecting calls carry one resource
 * parameter "res_<trace id>_<k>".
 */
[[nodiscard]] Corpus generate_corpus(const SynthSpec& spec, const Catalog& catalog);

[[nodiscard]] SynthSpec parse_synth_spec(std::string_view json_text);
[[nodiscard]] SynthSpec load_synth_spec(const std::filesystem::path& path);
[[nodiscard]] std::string synth_spec_to_json(const SynthSpec& spec);

/// Calibrated desk-scale corpus: 100 + 100 traces of 500 events.
[[nodiscard]] SynthSpec default_synth_spec();

}  // namespace obfbench
