#include "obfbench/catalog.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obfbench/error.hpp"
#include "obfbench/rng.hpp"

namespace obfbench {

Catalog Catalog::create(std::vector<std::string> alphabet,
                        std::span<const std::string> side_effect,
                        std::span<const std::string> unique_resource) {
  if (alphabet.empty()) throw ValidationError("catalog alphabet is empty");

  Catalog c;
  c.index_.reserve(alphabet.size());
  std::uint64_t digest = 0x6a09e667f3bcc908ull;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const auto& name = alphabet[i];
    if (name.empty()) throw ValidationError("catalog alphabet contains an empty name");
    if (!c.index_.emplace(name, static_cast<NameId>(i)).second) {
      throw ValidationError("duplicate name in catalog alphabet: " + name);
    }
    digest = derive_key(digest, fnv1a64(name));
  }
  c.digest_ = digest;
  c.side_effect_.assign(alphabet.size(), false);
  c.unique_resource_.assign(alphabet.size(), false);

  auto mark = [&](std::span<const std::string> names, std::vector<bool>& flags,
                  const char* set_name) {
    for (const auto& n : names) {
      auto it = c.index_.find(n);
      if (it == c.index_.end()) {
        throw ValidationError(std::string(set_name) + " member not in alphabet: " + n);
      }
      flags[it->second] = true;
    }
  };
  mark(side_effect, c.side_effect_, "side_effect");
  mark(unique_resource, c.unique_resource_, "unique_resource");

  c.alphabet_ = std::move(alphabet);
  return c;
}

std::optional<NameId> Catalog::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Catalog::is_side_effect(std::string_view name) const {
  auto id = find(name);
  return id && side_effect_[*id];
}

bool Catalog::is_unique_resource(std::string_view name) const {
  auto id = find(name);
  return id && unique_resource_[*id];
}

std::vector<std::string> Catalog::side_effect_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < alphabet_.size(); ++i)
    if (side_effect_[i]) out.push_back(alphabet_[i]);
  return out;
}

std::vector<std::string> Catalog::unique_resource_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < alphabet_.size(); ++i)
    if (unique_resource_[i]) out.push_back(alphabet_[i]);
  return out;
}

bool is_insertable(const Catalog& catalog, std::string_view name) {
  auto id = catalog.find(name);
  return id.has_value() && !catalog.is_unique_resource(name);
}

namespace {

std::vector<std::string> string_array(const nlohmann::json& obj, const char* key, bool required) {
  if (!obj.contains(key)) {
    if (required) throw ParseError(std::string("catalog: missing field '") + key + "'");
    return {};
  }
  const auto& arr = obj.at(key);
  if (!arr.is_array()) throw ParseError(std::string("catalog: '") + key + "' must be an array");
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_string()) throw ParseError(std::string("catalog: '") + key + "' holds a non-string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Catalog parse_catalog(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("catalog: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("catalog: top level must be an object");
  auto alphabet = string_array(doc, "alphabet", true);
  auto side = string_array(doc, "side_effect", false);
  auto unique = string_array(doc, "unique_resource", false);
  return Catalog::create(std::move(alphabet), side, unique);
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open catalog file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

std::string catalog_to_json(const Catalog& catalog) {
  nlohmann::json doc;
  doc["alphabet"] = catalog.alphabet();
  doc["side_effect"] = catalog.side_effect_names();
  doc["unique_resource"] = catalog.unique_resource_names();
  return doc.dump(2) + "\n";
}

const Catalog& default_catalog() {
  static const Catalog catalog = [] {
    std::vector<std::string> alphabet{
        "open",  "read",  "write",    "close",    "socket", "send",       "recv",
        "connect", "createfile", "deletefile", "regread", "regwrite", "alloc", "free",
        "query", "getinfo", "sleep", "gettime", "enumproc", "loadlib"};
    const std::vector<std::string> side{"write", "send", "createfile", "deletefile", "regwrite"};
    return Catalog::create(std::move(alphabet), side, {});
  }();
  return catalog;
}

}  // namespace obfbench
