#include "obfbench/features.hpp"

#include <algorithm>
#include <array>
#include <map>

#include <json.hpp>

#include "obfbench/error.hpp"

namespace obfbench {

std::string_view to_string(GramMode mode) noexcept {
  return mode == GramMode::ordered ? "ordered" : "unordered";
}

GramMode parse_gram_mode(std::string_view text) {
  if (text == "ordered") return GramMode::ordered;
  if (text == "unordered") return GramMode::unordered;
  throw ParseError("unknown n-gram mode: " + std::string(text));
}

void FeatureConfig::validate() const {
  if (n < 2) throw ParamError("n-gram size must be >= 2");
}

std::uint64_t FeatureVector::total_count() const noexcept {
  std::uint64_t total = 0;
  for (const auto& [tok, c] : tokens) total += c;
  return total;
}

std::vector<std::vector<std::string>> extract_ordered_ngrams(std::span<const std::string> names,
                                                             std::size_t n) {
  std::vector<std::vector<std::string>> out;
  if (n == 0 || names.size() < n) return out;
  out.reserve(names.size() - n + 1);
  for (std::size_t i = 0; i + n <= names.size(); ++i) {
    out.emplace_back(names.begin() + static_cast<std::ptrdiff_t>(i),
                     names.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

std::vector<NameId> to_name_ids(std::span<const std::string> names, const Catalog& catalog) {
  std::vector<NameId> ids;
  ids.reserve(names.size());
  for (const auto& name : names) {
    auto id = catalog.find(name);
    if (!id) throw UnknownNameError("name not in catalog alphabet: " + name);
    ids.push_back(*id);
  }
  return ids;
}

std::vector<NameId> to_name_ids(const Trace& trace, const Catalog& catalog) {
  std::vector<NameId> ids;
  ids.reserve(trace.events.size());
  for (const auto& ev : trace.events) {
    auto id = catalog.find(ev.name);
    if (!id) throw UnknownNameError("trace " + trace.id + ": name not in catalog alphabet: " + ev.name);
    ids.push_back(*id);
  }
  return ids;
}

std::vector<std::vector<std::uint32_t>> extract_unordered_vectors(
    std::span<const std::string> names, std::size_t n, const Catalog& catalog) {
  const auto ids = to_name_ids(names, catalog);
  std::vector<std::vector<std::uint32_t>> out;
  if (n == 0 || ids.size() < n) return out;
  std::vector<std::uint32_t> counts(catalog.size(), 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[ids[i]];
  out.push_back(counts);
  for (std::size_t i = n; i < ids.size(); ++i) {
    --counts[ids[i - n]];
    ++counts[ids[i]];
    out.push_back(counts);
  }
  return out;
}

namespace {

std::size_t id_width(const Catalog& catalog) { return catalog.size() <= 256 ? 1 : 2; }

void append_id(Token& tok, NameId id, std::size_t width) {
  tok.push_back(static_cast<char>(id & 0xff));
  if (width == 2) tok.push_back(static_cast<char>((id >> 8) & 0xff));
}

}  // namespace

Token encode_token(std::span<const NameId> window, GramMode mode, const Catalog& catalog) {
  const std::size_t width = id_width(catalog);
  Token tok;
  tok.reserve(window.size() * width);
  if (mode == GramMode::ordered) {
    for (auto id : window) append_id(tok, id, width);
  } else {
    std::vector<NameId> sorted(window.begin(), window.end());
    std::sort(sorted.begin(), sorted.end());
    for (auto id : sorted) append_id(tok, id, width);
  }
  return tok;
}

std::vector<std::string> decode_token(const Token& token, const Catalog& catalog) {
  const std::size_t width = id_width(catalog);
  if (token.size() % width != 0) throw ParseError("malformed token encoding");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < token.size(); i += width) {
    NameId id = static_cast<unsigned char>(token[i]);
    if (width == 2) id |= static_cast<NameId>(static_cast<unsigned char>(token[i + 1])) << 8;
    if (id >= catalog.size()) throw ParseError("token id outside catalog alphabet");
    names.push_back(catalog.name(id));
  }
  return names;
}

FeatureVector featurize_ids(std::span<const NameId> ids, std::string trace_id,
                            const FeatureConfig& config, const Catalog& catalog) {
  config.validate();
  FeatureVector fv;
  fv.trace_id = std::move(trace_id);
  fv.config = config;
  fv.alphabet_digest = catalog.alphabet_digest();
  const std::size_t n = config.n;
  if (ids.size() < n) {
    fv.short_trace = true;
    return fv;
  }
  const std::size_t width = id_width(catalog);
  const std::size_t windows = ids.size() - n + 1;
  fv.tokens.reserve(windows);

  Token tok;
  tok.reserve(n * width);
  std::vector<NameId> scratch(n);
  for (std::size_t i = 0; i < windows; ++i) {
    tok.clear();
    if (config.mode == GramMode::ordered) {
      for (std::size_t j = 0; j < n; ++j) append_id(tok, ids[i + j], width);
    } else {
      std::copy_n(ids.begin() + static_cast<std::ptrdiff_t>(i), n, scratch.begin());
      std::sort(scratch.begin(), scratch.end());
      for (auto id : scratch) append_id(tok, id, width);
    }
    ++fv.tokens[tok];
  }
  return fv;
}

FeatureVector featurize(const Trace& trace, const FeatureConfig& config, const Catalog& catalog) {
  return featurize_ids(to_name_ids(trace, catalog), trace.id, config, catalog);
}

std::string feature_dump_jsonl(const FeatureVector& fv, const Catalog& catalog) {
  std::map<std::vector<std::string>, std::uint32_t> sorted;
  for (const auto& [tok, c] : fv.tokens) sorted.emplace(decode_token(tok, catalog), c);
  std::string out;
  for (const auto& [names, c] : sorted) {
    nlohmann::json line{{"trace_id", fv.trace_id}, {"token", names}, {"count", c}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace obfbench
