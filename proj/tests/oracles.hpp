#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "obfbench/catalog.hpp"
#include "obfbench/trace.hpp"

namespace obfbench::testing {

/// Textbook full-matrix edit distance.
template <typename Seq>
std::size_t full_matrix_levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return d[n][m];
}

/// Random trace over the catalog; side-effecting events get one resource param.
inline Trace random_trace(std::mt19937_64& gen, const Catalog& catalog, std::size_t length,
                          std::string id = "t") {
  Trace t{std::move(id), Label::malware, {}, false};
  std::uniform_int_distribution<std::size_t> pick(0, catalog.size() - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const auto& name = catalog.name(static_cast<NameId>(pick(gen)));
    SyscallEvent ev{name, {}, false};
    if (catalog.is_side_effect(name)) ev.params.push_back("res_" + t.id + "_" + std::to_string(i));
    t.events.push_back(std::move(ev));
  }
  return t;
}

inline std::vector<SyscallEvent> non_synthetic(const Trace& t) {
  std::vector<SyscallEvent> out;
  for (const auto& e : t.events)
    if (!e.synthetic) out.push_back(e);
  return out;
}

inline std::size_t synthetic_count(const Trace& t) {
  return static_cast<std::size_t>(
      std::count_if(t.events.begin(), t.events.end(), [](const auto& e) { return e.synthetic; }));
}

}  // namespace obfbench::testing
