#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obfbench/catalog.hpp"
#include "obfbench/classify.hpp"
#include "obfbench/features.hpp"
#include "obfbench/metrics.hpp"
#include "obfbench/obfuscate.hpp"
#include "obfbench/trace.hpp"

namespace obfbench {

/// Which transformations a grid cell effectively exercises.
///   insertion_only  : p_r = 0 (nothing is delayed, so p_ri never fires)
///   reordering_only : p_i = 0 and p_r > 0
///   combined        : p_i > 0 and p_r > 0
enum class Family { combined, insertion_only, reordering_only };

[[nodiscard]] std::string_view to_string(Family family) noexcept;
[[nodiscard]] Family parse_family(std::string_view text);
[[nodiscard]] Family classify_family(double p_i, double p_r) noexcept;

struct GridSpec {
  /// Shared value list for p_i, p_r and p_ri.
  std::vector<double> p_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::uint64_t> max_i_values{1, 5, 10};
  std::uint64_t min_i = 1;
  std::uint64_t min_ri = 1;
  std::uint64_t max_ri = 3;
  std::uint64_t queue_size = 5;
  std::vector<std::size_t> gram_sizes{3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<Algorithm> classifiers{Algorithm::naive_bayes, Algorithm::nearest_centroid};
  std::vector<GramMode> modes{GramMode::ordered, GramMode::unordered};
  std::uint64_t master_seed = 2016;

  /// Throws SpecError.
  void validate() const;
};

/// 5 x 5 x 5 x 3 grid with min_{i,ri} = 1, max_ri = 3, queue size 5.
[[nodiscard]] GridSpec full_grid_spec();
[[nodiscard]] GridSpec parse_grid_spec(std::string_view json_text);
[[nodiscard]] GridSpec load_grid_spec(const std::filesystem::path& path);
[[nodiscard]] std::string grid_spec_to_json(const GridSpec& spec);

struct GridCell {
  std::size_t index = 0;
  ObfuscationProfile profile;
  Family family = Family::combined;
};

/// Cartesian product p_i x p_r x p_ri x max_i (p_i outermost). Every cell
/// carries both transformations; its seed is derived from (master_seed, index).
[[nodiscard]] std::vector<GridCell> enumerate_grid(const GridSpec& spec);

struct SweepResult {
  std::size_t cell_index = 0;
  ObfuscationProfile profile;
  Family family = Family::combined;
  std::size_t gram_size = 0;
  GramMode mode = GramMode::ordered;
  Algorithm classifier = Algorithm::naive_bayes;
  double mean_degree = 0.0;
  double detection_rate = 0.0;
  /// Set when the cell failed; the numeric fields are then meaningless.
  std::optional<std::string> error;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Optional permutation of cell indices giving the execution order.
  std::vector<std::size_t> execution_order;
  /// Called after each finished cell with (done, total); may be invoked from
  /// worker threads, serialized by the harness.
  std::function<void(std::size_t, std::size_t)> progress;
};

/**
 * Trains every (gram size, mode, classifier) once on the clean corpus, then
 * for each grid cell obfuscates the malware traces only, measures the mean
 * edit distance to the originals and the detection rate. Output is sorted
 * by (cell, gram size, mode, classifier) in spec order and does not depend
 * on execution order or thread count.
 */
[[nodiscard]] std::vector<SweepResult> run_sweep(const Corpus& corpus, const GridSpec& spec,
                                                 const Catalog& catalog,
                                                 const SweepOptions& options = {});

/// Evaluate an explicit list of cells; run_sweep is this over enumerate_grid.
[[nodiscard]] std::vector<SweepResult> run_cells(const Corpus& corpus, const GridSpec& spec,
                                                 std::span<const GridCell> cells,
                                                 const Catalog& catalog,
                                                 const SweepOptions& options = {});

/// One fitted trend per (family, gram size, mode, classifier) group.
struct TrendRow {
  Family family;
  std::size_t gram_size;
  GramMode mode;
  Algorithm classifier;
  std::size_t points;
  std::optional<QuadraticFit> quadratic;
  std::optional<LinearFit> linear;
};

[[nodiscard]] std::vector<TrendRow> compute_trends(std::span<const SweepResult> results);

[[nodiscard]] std::string results_csv(std::span<const SweepResult> results);
[[nodiscard]] std::string trends_csv(std::span<const TrendRow> trends);
/// Scatter of detection rate against degree for one family, one panel per
/// (mode, classifier), one colour per gram size, quadratic trends overlaid.
[[nodiscard]] std::string family_plot_svg(std::span<const SweepResult> results, Family family);

/// Parses a results.csv written by emit_report. Profile seeds are not part
/// of the CSV and come back as 0.
[[nodiscard]] std::vector<SweepResult> parse_results_csv(std::string_view csv);
[[nodiscard]] std::vector<SweepResult> load_results_csv(const std::filesystem::path& path);

/// Writes results.csv, trends.csv and plot_<family>.svg for every family
/// present. Throws EmptyInputError on empty results and IoError on write
/// failures.
void emit_report(std::span<const SweepResult> results, const std::filesystem::path& out_dir);

}  // namespace obfbench
