#include "obfbench/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "obfbench/error.hpp"

namespace obfbench {

namespace {

// Interns both name projections into one dense id space.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> intern(const Trace& a,
                                                                          const Trace& b) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto map = [&](const Trace& t) {
    std::vector<std::uint32_t> out;
    out.reserve(t.events.size());
    for (const auto& ev : t.events) {
      auto [it, fresh] = ids.emplace(ev.name, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  auto ia = map(a);
  auto ib = map(b);
  return {std::move(ia), std::move(ib)};
}

}  // namespace

std::size_t trace_distance(const Trace& a, const Trace& b) {
  const auto [ia, ib] = intern(a, b);
  return levenshtein(ia, ib);
}

DegreeReport obfuscation_degree(const Corpus& original, const Corpus& obfuscated) {
  std::unordered_map<std::string_view, const Trace*> by_id;
  for (const auto& t : obfuscated.traces) {
    if (!by_id.emplace(t.id, &t).second) throw IdMismatchError("duplicate id in obfuscated corpus: " + t.id);
  }
  if (by_id.size() != original.traces.size()) {
    throw IdMismatchError("corpora hold different numbers of traces");
  }
  DegreeReport report;
  double sum = 0.0, normalized = 0.0;
  for (const auto& t : original.traces) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) throw IdMismatchError("trace id missing from obfuscated corpus: " + t.id);
    const std::size_t d = trace_distance(t, *it->second);
    if (!report.per_trace.emplace(t.id, d).second) {
      throw IdMismatchError("duplicate id in original corpus: " + t.id);
    }
    sum += static_cast<double>(d);
    if (!t.events.empty()) normalized += static_cast<double>(d) / static_cast<double>(t.events.size());
  }
  if (!original.traces.empty()) {
    const auto n = static_cast<double>(original.traces.size());
    report.mean_degree = sum / n;
    report.mean_normalized_degree = normalized / n;
  }
  return report;
}

namespace {

std::size_t distinct_x(std::span<const Point> points) {
  std::set<double> xs;
  for (const auto& p : points) xs.insert(p.x);
  return xs.size();
}

// Solves the k x k system in place by Gaussian elimination with partial
// pivoting. Returns false on a (numerically) singular matrix.
template <std::size_t K>
bool solve(std::array<std::array<double, K + 1>, K>& m, std::array<double, K>& x) {
  for (std::size_t col = 0; col < K; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < K; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[pivot], m[col]);
    for (std::size_t r = col + 1; r < K; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= K; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (std::size_t i = K; i-- > 0;) {
    double acc = m[i][K];
    for (std::size_t c = i + 1; c < K; ++c) acc -= m[i][c] * x[c];
    x[i] = acc / m[i][i];
  }
  return true;
}

// Fits a polynomial of degree K-1 in the standardized variable
// t = (x - shift) / scale and returns coefficients in t.
template <std::size_t K>
std::array<double, K> fit_standardized(std::span<const Point> points, double shift, double scale) {
  std::array<std::array<double, K + 1>, K> normal{};
  for (const auto& p : points) {
    const double t = (p.x - shift) / scale;
    std::array<double, 2 * K - 1> pow{};
    pow[0] = 1.0;
    for (std::size_t i = 1; i < pow.size(); ++i) pow[i] = pow[i - 1] * t;
    for (std::size_t r = 0; r < K; ++r) {
      for (std::size_t c = 0; c < K; ++c) normal[r][c] += pow[r + c];
      normal[r][K] += pow[r] * p.y;
    }
  }
  std::array<double, K> coef{};
  if (!solve<K>(normal, coef)) throw RankDeficientError("trend fit: normal equations are singular");
  return coef;
}

std::pair<double, double> standardization(std::span<const Point> points) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
    sum += p.x;
  }
  const double shift = sum / static_cast<double>(points.size());
  const double scale = std::max(hi - lo, std::numeric_limits<double>::min()) / 2.0;
  return {shift, scale};
}

}  // namespace

QuadraticFit fit_quadratic_trend(std::span<const Point> points) {
  if (points.size() < 3 || distinct_x(points) < 3) {
    throw RankDeficientError("quadratic trend needs at least 3 distinct x values");
  }
  const auto [m, s] = standardization(points);
  const auto a = fit_standardized<3>(points, m, s);
  // y = a0 + a1 (x-m)/s + a2 (x-m)^2/s^2, expanded in x.
  return {a[0] - a[1] * m / s + a[2] * m * m / (s * s), a[1] / s - 2.0 * a[2] * m / (s * s),
          a[2] / (s * s)};
}

LinearFit fit_linear_trend(std::span<const Point> points) {
  if (points.size() < 2 || distinct_x(points) < 2) {
    throw RankDeficientError("linear trend needs at least 2 distinct x values");
  }
  const auto [m, s] = standardization(points);
  const auto a = fit_standardized<2>(points, m, s);
  return {a[0] - a[1] * m / s, a[1] / s};
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(std::span<const Point> points) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (points.size() < 2) return nan;
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(points.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return nan;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace obfbench
