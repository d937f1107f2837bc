#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "obfbench/catalog.hpp"
#include "obfbench/rng.hpp"
#include "obfbench/trace.hpp"

namespace obfbench {

/// With probability p_i after each call, insert between min_i and max_i calls.
struct InsertionParams {
  double p_i = 0.0;
  std::uint64_t min_i = 0;
  std::uint64_t max_i = 0;

  /// Throws ParamError.
  void validate() const;
  friend bool operator==(const InsertionParams&, const InsertionParams&) = default;
};

/// Delay side-effecting calls with probability p_r into a FIFO of queue_size;
/// each flushed call may trigger an insertion burst (p_ri, min_ri, max_ri).
struct ReorderingParams {
  double p_r = 0.0;
  std::uint64_t queue_size = 1;
  double p_ri = 0.0;
  std::uint64_t min_ri = 0;
  std::uint64_t max_ri = 0;

  /// Throws ParamError.
  void validate() const;
  friend bool operator==(const ReorderingParams&, const ReorderingParams&) = default;
};

struct ObfuscationProfile {
  std::optional<InsertionParams> insertion;
  std::optional<ReorderingParams> reordering;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] bool is_identity() const noexcept { return !insertion && !reordering; }
  friend bool operator==(const ObfuscationProfile&, const ObfuscationProfile&) = default;
};

enum class Stage : std::uint64_t { reordering = 1, insertion = 2 };

/// The random stream a stage of apply_profile draws from for one trace.
[[nodiscard]] RandomStream stage_stream(std::uint64_t profile_seed, std::string_view trace_id,
                                        Stage stage);

/// Copy of a side-effecting event whose params are rewritten to
/// "feebo_<trace_id>_<counter>_<param_index>" and flagged synthetic.
[[nodiscard]] SyscallEvent neutralize(const SyscallEvent& event, std::string_view trace_id,
                                      std::uint64_t counter);

/**
 * Call insertion. After each input event, with probability p_i, emits a
 * burst of uniform{min_i..max_i} synthetic copies drawn with replacement
 * from the insertable non-synthetic input events seen so far (current one
 * included). Side-effecting copies are neutralized. Input events are never
 * altered or reordered.
 *
 * `neutralize_counter` is the next counter to hand out; it is advanced past
 * every neutralization performed.
 */
[[nodiscard]] Trace apply_insertion(const Trace& trace, const InsertionParams& params,
                                    const Catalog& catalog, RandomStream& rng,
                                    std::uint64_t& neutralize_counter);
[[nodiscard]] Trace apply_insertion(const Trace& trace, const InsertionParams& params,
                                    const Catalog& catalog, RandomStream& rng);

/**
 * Call reordering. Calls outside S pass through. A call in S is delayed with
 * probability p_r into a FIFO; reaching queue_size entries flushes the queue
 * in original order, each flushed call followed by an optional insertion
 * burst (p_ri, min_ri..max_ri, same pool rule as insertion). A residual
 * queue is flushed at end of trace.
 */
[[nodiscard]] Trace apply_reordering(const Trace& trace, const ReorderingParams& params,
                                     const Catalog& catalog, RandomStream& rng,
                                     std::uint64_t& neutralize_counter);
[[nodiscard]] Trace apply_reordering(const Trace& trace, const ReorderingParams& params,
                                     const Catalog& catalog, RandomStream& rng);

/// Reordering (if configured) then insertion on the reordered stream.
/// Deterministic in (trace, profile, catalog).
[[nodiscard]] Trace apply_profile(const Trace& trace, const ObfuscationProfile& profile,
                                  const Catalog& catalog);

/// Obfuscates every malware trace; goodware passes through unchanged unless
/// include_goodware is set.
[[nodiscard]] Corpus obfuscate_corpus(const Corpus& corpus, const ObfuscationProfile& profile,
                                      const Catalog& catalog, bool include_goodware = false);

[[nodiscard]] ObfuscationProfile parse_profile(std::string_view json_text);
[[nodiscard]] ObfuscationProfile load_profile(const std::filesystem::path& path);
[[nodiscard]] std::string profile_to_json(const ObfuscationProfile& profile);

}  // namespace obfbench
