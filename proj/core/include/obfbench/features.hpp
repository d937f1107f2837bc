#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "obfbench/catalog.hpp"
#include "obfbench/trace.hpp"

namespace obfbench {

enum class GramMode { ordered, unordered };

[[nodiscard]] std::string_view to_string(GramMode mode) noexcept;
[[nodiscard]] GramMode parse_gram_mode(std::string_view text);

struct FeatureConfig {
  std::size_t n = 3;
  GramMode mode = GramMode::ordered;

  /// Throws ParamError when n < 2.
  void validate() const;
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Opaque, catalog-relative encoding of one n-gram: the window's name ids,
/// one or two bytes each, in window order (ordered) or sorted (unordered).
using Token = std::string;
using TokenCounts = std::unordered_map<Token, std::uint32_t>;

/// Bag of n-gram tokens for one trace.
struct FeatureVector {
  std::string trace_id;
  FeatureConfig config;
  std::uint64_t alphabet_digest = 0;
  TokenCounts tokens;
  /// Set when the trace is shorter than n and produced no windows.
  bool short_trace = false;

  [[nodiscard]] std::uint64_t total_count() const noexcept;
};

/// Windows names[i, i+n) for i = 0..L-n; empty when L < n.
[[nodiscard]] std::vector<std::vector<std::string>> extract_ordered_ngrams(
    std::span<const std::string> names, std::size_t n);

/// One count vector per window; entry j counts catalog.alphabet()[j].
/// Throws UnknownNameError for names outside the alphabet.
[[nodiscard]] std::vector<std::vector<std::uint32_t>> extract_unordered_vectors(
    std::span<const std::string> names, std::size_t n, const Catalog& catalog);

/// Maps names to catalog ids; throws UnknownNameError.
[[nodiscard]] std::vector<NameId> to_name_ids(std::span<const std::string> names,
                                              const Catalog& catalog);
[[nodiscard]] std::vector<NameId> to_name_ids(const Trace& trace, const Catalog& catalog);

[[nodiscard]] FeatureVector featurize(const Trace& trace, const FeatureConfig& config,
                                      const Catalog& catalog);
/// Same as featurize, starting from already projected name ids.
[[nodiscard]] FeatureVector featurize_ids(std::span<const NameId> ids, std::string trace_id,
                                          const FeatureConfig& config, const Catalog& catalog);

/// Token construction for a window of ids, exposed for tests and model I/O.
[[nodiscard]] Token encode_token(std::span<const NameId> window, GramMode mode,
                                 const Catalog& catalog);
[[nodiscard]] std::vector<std::string> decode_token(const Token& token, const Catalog& catalog);

/// Debug dump: one {"trace_id", "token", "count"} object per line, tokens
/// sorted by their name rendering.
[[nodiscard]] std::string feature_dump_jsonl(const FeatureVector& fv, const Catalog& catalog);

}  // namespace obfbench
