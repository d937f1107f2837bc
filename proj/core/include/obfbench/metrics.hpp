#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obfbench/trace.hpp"

namespace obfbench {

/**
 * Unit-cost edit distance over any two random-access sequences with
 * equality-comparable elements.
 *
 * Common prefix and suffix are stripped first; the remaining core is a
 * two-row dynamic program whose row spans the shorter sequence, so memory is
 * O(min(|a|, |b|)).
 */
template <typename SeqA, typename SeqB>
std::size_t levenshtein(const SeqA& a, const SeqB& b) {
  std::size_t a_begin = 0, a_end = std::size(a);
  std::size_t b_begin = 0, b_end = std::size(b);
  while (a_begin < a_end && b_begin < b_end && a[a_begin] == b[b_begin]) {
    ++a_begin;
    ++b_begin;
  }
  while (a_begin < a_end && b_begin < b_end && a[a_end - 1] == b[b_end - 1]) {
    --a_end;
    --b_end;
  }
  const std::size_t la = a_end - a_begin;
  const std::size_t lb = b_end - b_begin;
  if (la == 0) return lb;
  if (lb == 0) return la;

  auto run = [](const auto& outer, std::size_t o0, std::size_t lo, const auto& inner,
                std::size_t i0, std::size_t li) {
    std::vector<std::size_t> row(li + 1);
    for (std::size_t j = 0; j <= li; ++j) row[j] = j;
    for (std::size_t i = 1; i <= lo; ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      const auto& oc = outer[o0 + i - 1];
      for (std::size_t j = 1; j <= li; ++j) {
        const std::size_t up = row[j];
        const std::size_t subst = diag + (oc == inner[i0 + j - 1] ? 0 : 1);
        row[j] = std::min({up + 1, row[j - 1] + 1, subst});
        diag = up;
      }
    }
    return row[li];
  };
  return la >= lb ? run(a, a_begin, la, b, b_begin, lb) : run(b, b_begin, lb, a, a_begin, la);
}

/// Edit distance between the name projections of two traces.
[[nodiscard]] std::size_t trace_distance(const Trace& a, const Trace& b);

struct DegreeReport {
  std::map<std::string, std::size_t> per_trace;
  double mean_degree = 0.0;
  /// Mean of distance / |original|; traces of length 0 contribute 0.
  double mean_normalized_degree = 0.0;
};

/// Per-id edit distance between name projections. Both corpora must hold
/// exactly the same trace ids (IdMismatchError otherwise). An empty pair of
/// corpora yields mean 0.
[[nodiscard]] DegreeReport obfuscation_degree(const Corpus& original, const Corpus& obfuscated);

struct Point {
  double x;
  double y;
};

struct QuadraticFit {
  double c0, c1, c2;
};

struct LinearFit {
  double c0, c1;
};

/// Least-squares y ~ c0 + c1 x + c2 x^2. Needs >= 3 distinct x values
/// (RankDeficientError otherwise).
[[nodiscard]] QuadraticFit fit_quadratic_trend(std::span<const Point> points);
/// Least-squares y ~ c0 + c1 x. Needs >= 2 distinct x values.
[[nodiscard]] LinearFit fit_linear_trend(std::span<const Point> points);

/// Spearman's rho with average ranks for ties. Returns NaN when either
/// variable is constant or fewer than two points are given.
[[nodiscard]] double spearman_rank_correlation(std::span<const Point> points);

}  // namespace obfbench
