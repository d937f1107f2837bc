#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace obfbench {

/// Dense index of a name within a catalog alphabet.
using NameId = std::uint32_t;

/**
 * The universe of system-call names and the two behavioral classes that
 * gate obfuscation: side-effecting calls (S, delayed by reordering and
 * neutralized when inserted) and unique-resource calls (U, never inserted).
 *
 * Immutable once built; S and U are always subsets of the alphabet.
 */
class Catalog {
 public:
  /// Throws ValidationError on an empty alphabet, duplicate or empty names,
  /// or S/U members outside the alphabet.
  static Catalog create(std::vector<std::string> alphabet,
                        std::span<const std::string> side_effect,
                        std::span<const std::string> unique_resource);

  [[nodiscard]] const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  [[nodiscard]] std::size_t size() const noexcept { return alphabet_.size(); }
  [[nodiscard]] const std::string& name(NameId id) const { return alphabet_.at(id); }

  [[nodiscard]] std::optional<NameId> find(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const { return find(name).has_value(); }

  [[nodiscard]] bool is_side_effect(std::string_view name) const;
  [[nodiscard]] bool is_side_effect(NameId id) const { return side_effect_.at(id); }
  [[nodiscard]] bool is_unique_resource(std::string_view name) const;

  /// Members of S / U in alphabet order.
  [[nodiscard]] std::vector<std::string> side_effect_names() const;
  [[nodiscard]] std::vector<std::string> unique_resource_names() const;

  /// Order-sensitive digest of the alphabet; identifies token encodings.
  [[nodiscard]] std::uint64_t alphabet_digest() const noexcept { return digest_; }

  friend bool operator==(const Catalog& a, const Catalog& b) {
    return a.alphabet_ == b.alphabet_ && a.side_effect_ == b.side_effect_ &&
           a.unique_resource_ == b.unique_resource_;
  }

 private:
  Catalog() = default;

  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, NameId, Hash, std::equal_to<>> index_;
  std::vector<bool> side_effect_;
  std::vector<bool> unique_resource_;
  std::uint64_t digest_ = 0;
};

/// True iff the name is in the alphabet and not in the unique-resource set.
[[nodiscard]] bool is_insertable(const Catalog& catalog, std::string_view name);

/// Parse the JSON catalog format
/// {"alphabet": [...], "side_effect": [...], "unique_resource": [...]}.
[[nodiscard]] Catalog parse_catalog(std::string_view json_text);
[[nodiscard]] Catalog load_catalog(const std::filesystem::path& path);
[[nodiscard]] std::string catalog_to_json(const Catalog& catalog);

/// The 20-name generic catalog used by the synthetic corpus and the
/// acceptance runs. S = {write, send, createfile, deletefile, regwrite}, U = {}.
[[nodiscard]] const Catalog& default_catalog();

}  // namespace obfbench
