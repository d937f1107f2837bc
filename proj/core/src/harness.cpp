#include "obfbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "obfbench/error.hpp"
#include "obfbench/rng.hpp"

namespace obfbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::combined: return "combined";
    case Family::insertion_only: return "insertion_only";
    case Family::reordering_only: return "reordering_only";
  }
  return "combined";
}

Family parse_family(std::string_view text) {
  if (text == "combined") return Family::combined;
  if (text == "insertion_only") return Family::insertion_only;
  if (text == "reordering_only") return Family::reordering_only;
  throw ParseError("unknown family: " + std::string(text));
}

Family classify_family(double p_i, double p_r) noexcept {
  if (p_r == 0.0) return Family::insertion_only;
  if (p_i == 0.0) return Family::reordering_only;
  return Family::combined;
}

void GridSpec::validate() const {
  if (p_values.empty()) throw SpecError("grid: p_values is empty");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw SpecError("grid: probabilities must lie in [0, 1]");
  if (max_i_values.empty()) throw SpecError("grid: max_i_values is empty");
  for (auto m : max_i_values)
    if (m < min_i) throw SpecError("grid: every max_i must be >= min_i");
  if (max_ri < min_ri) throw SpecError("grid: max_ri must be >= min_ri");
  if (queue_size < 1) throw SpecError("grid: queue_size must be >= 1");
  if (gram_sizes.empty()) throw SpecError("grid: gram_sizes is empty");
  for (auto n : gram_sizes)
    if (n < 2) throw SpecError("grid: gram sizes must be >= 2");
  if (classifiers.empty()) throw SpecError("grid: no classifiers");
  if (modes.empty()) throw SpecError("grid: no n-gram modes");
}

GridSpec full_grid_spec() { return GridSpec{}; }

GridSpec parse_grid_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("grid spec: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("grid spec: top level must be an object");
  GridSpec spec;
  try {
    if (doc.contains("p_values")) spec.p_values = doc["p_values"].get<std::vector<double>>();
    if (doc.contains("max_i_values"))
      spec.max_i_values = doc["max_i_values"].get<std::vector<std::uint64_t>>();
    if (doc.contains("min_i")) spec.min_i = doc["min_i"].get<std::uint64_t>();
    if (doc.contains("min_ri")) spec.min_ri = doc["min_ri"].get<std::uint64_t>();
    if (doc.contains("max_ri")) spec.max_ri = doc["max_ri"].get<std::uint64_t>();
    if (doc.contains("queue_size")) spec.queue_size = doc["queue_size"].get<std::uint64_t>();
    if (doc.contains("gram_sizes")) spec.gram_sizes = doc["gram_sizes"].get<std::vector<std::size_t>>();
    if (doc.contains("classifiers")) {
      spec.classifiers.clear();
      for (const auto& c : doc["classifiers"]) spec.classifiers.push_back(parse_algorithm(c.get<std::string>()));
    }
    if (doc.contains("modes")) {
      spec.modes.clear();
      for (const auto& m : doc["modes"]) spec.modes.push_back(parse_gram_mode(m.get<std::string>()));
    }
    if (doc.contains("master_seed")) spec.master_seed = doc["master_seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("grid spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

GridSpec load_grid_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open grid spec: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_spec(buf.str());
}

std::string grid_spec_to_json(const GridSpec& spec) {
  json classifiers = json::array(), modes = json::array();
  for (auto c : spec.classifiers) classifiers.push_back(std::string(to_string(c)));
  for (auto m : spec.modes) modes.push_back(std::string(to_string(m)));
  json doc{{"p_values", spec.p_values}, {"max_i_values", spec.max_i_values},
           {"min_i", spec.min_i},       {"min_ri", spec.min_ri},
           {"max_ri", spec.max_ri},     {"queue_size", spec.queue_size},
           {"gram_sizes", spec.gram_sizes}, {"classifiers", classifiers},
           {"modes", modes},            {"master_seed", spec.master_seed}};
  return doc.dump(2) + "\n";
}

std::vector<GridCell> enumerate_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<GridCell> cells;
  cells.reserve(spec.p_values.size() * spec.p_values.size() * spec.p_values.size() *
                spec.max_i_values.size());
  for (double p_i : spec.p_values) {
    for (double p_r : spec.p_values) {
      for (double p_ri : spec.p_values) {
        for (auto max_i : spec.max_i_values) {
          GridCell cell;
          cell.index = cells.size();
          cell.profile.insertion = InsertionParams{p_i, spec.min_i, max_i};
          cell.profile.reordering = ReorderingParams{p_r, spec.queue_size, p_ri, spec.min_ri, spec.max_ri};
          cell.profile.seed = derive_key(spec.master_seed, cell.index);
          cell.family = classify_family(p_i, p_r);
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

namespace {

struct ModelKey {
  std::size_t gram;
  GramMode mode;
  Algorithm algorithm;
};

// Trained models in (gram, mode, classifier) spec order.
std::vector<TrainedModel> train_models(const Corpus& corpus, const GridSpec& spec,
                                       const Catalog& catalog,
                                       const std::vector<std::vector<NameId>>& clean_ids) {
  std::vector<TrainedModel> models;
  for (auto gram : spec.gram_sizes) {
    for (auto mode : spec.modes) {
      const FeatureConfig config{gram, mode};
      std::vector<TrainingSample> samples;
      samples.reserve(corpus.traces.size());
      for (std::size_t t = 0; t < corpus.traces.size(); ++t) {
        samples.push_back({featurize_ids(clean_ids[t], corpus.traces[t].id, config, catalog),
                           corpus.traces[t].label});
      }
      for (auto algorithm : spec.classifiers) {
        models.push_back(TrainedModel::train(samples, algorithm, catalog));
      }
    }
  }
  return models;
}

}  // namespace

std::vector<SweepResult> run_cells(const Corpus& corpus, const GridSpec& spec,
                                   std::span<const GridCell> cells, const Catalog& catalog,
                                   const SweepOptions& options) {
  spec.validate();
  corpus.validate_unique_ids();
  if (corpus.count(Label::malware) == 0 || corpus.count(Label::goodware) == 0) {
    throw DegenerateTrainingError("sweep corpus must contain malware and goodware traces");
  }

  std::vector<std::vector<NameId>> clean_ids;
  clean_ids.reserve(corpus.traces.size());
  for (const auto& t : corpus.traces) clean_ids.push_back(to_name_ids(t, catalog));
  const auto models = train_models(corpus, spec, catalog, clean_ids);

  std::vector<std::size_t> malware;
  for (std::size_t t = 0; t < corpus.traces.size(); ++t)
    if (corpus.traces[t].label == Label::malware) malware.push_back(t);

  const std::size_t per_cell = spec.gram_sizes.size() * spec.modes.size() * spec.classifiers.size();
  std::vector<SweepResult> results(cells.size() * per_cell);

  auto evaluate = [&](std::size_t slot) {
    const GridCell& cell = cells[slot];
    auto rows = results.begin() + static_cast<std::ptrdiff_t>(slot * per_cell);
    std::size_t r = 0;
    for (auto gram : spec.gram_sizes)
      for (auto mode : spec.modes)
        for (auto algorithm : spec.classifiers) {
          auto& row = rows[static_cast<std::ptrdiff_t>(r++)];
          row.cell_index = cell.index;
          row.profile = cell.profile;
          row.family = cell.family;
          row.gram_size = gram;
          row.mode = mode;
          row.classifier = algorithm;
        }
    try {
      std::vector<std::vector<NameId>> obf_ids;
      obf_ids.reserve(malware.size());
      double degree_sum = 0.0;
      for (auto t : malware) {
        const Trace obf = apply_profile(corpus.traces[t], cell.profile, catalog);
        obf_ids.push_back(to_name_ids(obf, catalog));
        degree_sum += static_cast<double>(levenshtein(clean_ids[t], obf_ids.back()));
      }
      const double mean_degree = degree_sum / static_cast<double>(malware.size());

      std::vector<std::size_t> hits(per_cell, 0);
      for (std::size_t m = 0; m < malware.size(); ++m) {
        std::size_t k = 0;
        for (auto gram : spec.gram_sizes) {
          for (auto mode : spec.modes) {
            const auto fv = featurize_ids(obf_ids[m], corpus.traces[malware[m]].id,
                                          FeatureConfig{gram, mode}, catalog);
            for (std::size_t a = 0; a < spec.classifiers.size(); ++a, ++k) {
              if (models[k].predict(fv).label == Label::malware) ++hits[k];
            }
          }
        }
      }
      for (std::size_t k = 0; k < per_cell; ++k) {
        auto& row = rows[static_cast<std::ptrdiff_t>(k)];
        row.mean_degree = mean_degree;
        row.detection_rate = static_cast<double>(hits[k]) / static_cast<double>(malware.size());
      }
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < per_cell; ++k) {
        auto& row = rows[static_cast<std::ptrdiff_t>(k)];
        row.mean_degree = std::nan("");
        row.detection_rate = std::nan("");
        row.error = e.what();
      }
    }
  };

  std::vector<std::size_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  } else {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i || sorted.size() != cells.size())
        throw SpecError("execution_order must be a permutation of the cell positions");
  }

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, order.size()))));
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      evaluate(order[i]);
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(++done, order.size());
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const SweepResult& a, const SweepResult& b) { return a.cell_index < b.cell_index; });
  return results;
}

std::vector<SweepResult> run_sweep(const Corpus& corpus, const GridSpec& spec, const Catalog& catalog,
                                   const SweepOptions& options) {
  const auto cells = enumerate_grid(spec);
  return run_cells(corpus, spec, cells, catalog, options);
}

namespace {

using GroupKey = std::tuple<Family, std::size_t, GramMode, Algorithm>;

std::map<GroupKey, std::vector<Point>> group_points(std::span<const SweepResult> results) {
  std::map<GroupKey, std::vector<Point>> groups;
  for (const auto& r : results) {
    if (r.error) continue;
    groups[{r.family, r.gram_size, r.mode, r.classifier}].push_back({r.mean_degree, r.detection_rate});
  }
  return groups;
}

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000".
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

}  // namespace

std::vector<TrendRow> compute_trends(std::span<const SweepResult> results) {
  std::vector<TrendRow> rows;
  for (const auto& [key, points] : group_points(results)) {
    TrendRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                 points.size(), std::nullopt, std::nullopt};
    try {
      row.quadratic = fit_quadratic_trend(points);
    } catch (const RankDeficientError&) {
    }
    try {
      row.linear = fit_linear_trend(points);
    } catch (const RankDeficientError&) {
    }
    rows.push_back(row);
  }
  return rows;
}

std::string results_csv(std::span<const SweepResult> results) {
  std::string out =
      "profile_id,family,p_i,min_i,max_i,p_r,queue_size,p_ri,min_ri,max_ri,gram_size,mode,"
      "classifier,mean_degree,detection_rate\n";
  for (const auto& r : results) {
    const InsertionParams ins = r.profile.insertion.value_or(InsertionParams{});
    const ReorderingParams reo = r.profile.reordering.value_or(ReorderingParams{0.0, 1, 0.0, 0, 0});
    out += std::to_string(r.cell_index) + ',' + std::string(to_string(r.family)) + ',' +
           fixed6(ins.p_i) + ',' + std::to_string(ins.min_i) + ',' + std::to_string(ins.max_i) + ',' +
           fixed6(reo.p_r) + ',' + std::to_string(reo.queue_size) + ',' + fixed6(reo.p_ri) + ',' +
           std::to_string(reo.min_ri) + ',' + std::to_string(reo.max_ri) + ',' +
           std::to_string(r.gram_size) + ',' + std::string(to_string(r.mode)) + ',' +
           std::string(to_string(r.classifier)) + ',' +
           (r.error ? std::string("error") : fixed6(r.mean_degree)) + ',' +
           (r.error ? std::string("error") : fixed6(r.detection_rate)) + '\n';
  }
  return out;
}

std::string trends_csv(std::span<const TrendRow> trends) {
  std::string out = "family,gram_size,mode,classifier,points,c0,c1,c2,linear_c0,linear_c1\n";
  for (const auto& t : trends) {
    const double nan = std::nan("");
    out += std::string(to_string(t.family)) + ',' + std::to_string(t.gram_size) + ',' +
           std::string(to_string(t.mode)) + ',' + std::string(to_string(t.classifier)) + ',' +
           std::to_string(t.points) + ',' + fixed6(t.quadratic ? t.quadratic->c0 : nan) + ',' +
           fixed6(t.quadratic ? t.quadratic->c1 : nan) + ',' +
           fixed6(t.quadratic ? t.quadratic->c2 : nan) + ',' +
           fixed6(t.linear ? t.linear->c0 : nan) + ',' + fixed6(t.linear ? t.linear->c1 : nan) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    fields.push_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("results.csv line " + std::to_string(line_no) + ": bad number '" +
                     std::string(field) + "'");
  }
  return value;
}

double parse_real(std::string_view field, std::size_t line_no) {
  if (field == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const std::string s(field);
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("results.csv line " + std::to_string(line_no) + ": bad number '" +
                     std::string(field) + "'");
  }
}

}  // namespace

std::vector<SweepResult> parse_results_csv(std::string_view csv) {
  std::vector<SweepResult> results;
  std::size_t pos = 0, line_no = 0;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    auto line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (!line.starts_with("profile_id,")) throw ParseError("results.csv: missing header");
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 15) {
      throw ParseError("results.csv line " + std::to_string(line_no) + ": expected 15 fields");
    }
    SweepResult r;
    r.cell_index = parse_number<std::size_t>(f[0], line_no);
    r.family = parse_family(f[1]);
    r.profile.insertion = InsertionParams{parse_real(f[2], line_no), parse_number<std::uint64_t>(f[3], line_no),
                                          parse_number<std::uint64_t>(f[4], line_no)};
    r.profile.reordering = ReorderingParams{parse_real(f[5], line_no), parse_number<std::uint64_t>(f[6], line_no),
                                            parse_real(f[7], line_no), parse_number<std::uint64_t>(f[8], line_no),
                                            parse_number<std::uint64_t>(f[9], line_no)};
    r.gram_size = parse_number<std::size_t>(f[10], line_no);
    r.mode = parse_gram_mode(f[11]);
    r.classifier = parse_algorithm(f[12]);
    if (f[13] == "error" || f[14] == "error") {
      r.error = "cell failed";
      r.mean_degree = std::nan("");
      r.detection_rate = std::nan("");
    } else {
      r.mean_degree = parse_real(f[13], line_no);
      r.detection_rate = parse_real(f[14], line_no);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<SweepResult> load_results_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open results: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str());
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string family_plot_svg(std::span<const SweepResult> results, Family family) {
  using Panel = std::pair<GramMode, Algorithm>;
  std::map<Panel, std::map<std::size_t, std::vector<Point>>> panels;
  double x_max = 0.0;
  for (const auto& r : results) {
    if (r.error || r.family != family) continue;
    panels[{r.mode, r.classifier}][r.gram_size].push_back({r.mean_degree, r.detection_rate});
    x_max = std::max(x_max, r.mean_degree);
  }
  if (x_max <= 0.0) x_max = 1.0;

  constexpr double pw = 360, ph = 240, ml = 50, mt = 40, gap = 30, legend = 110;
  const std::size_t cols = std::min<std::size_t>(2, std::max<std::size_t>(1, panels.size()));
  const std::size_t rows_n = (panels.size() + cols - 1) / cols;
  const double width = static_cast<double>(cols) * (pw + ml + gap) + legend;
  const double height = static_cast<double>(std::max<std::size_t>(1, rows_n)) * (ph + mt + gap) + 30;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"18\" font-size=\"14\">" << to_string(family)
      << ": degree of obfuscation vs. detection rate</text>\n";

  std::set<std::size_t> grams;
  std::size_t p = 0;
  for (const auto& [panel, series] : panels) {
    const double ox = static_cast<double>(p % cols) * (pw + ml + gap) + ml;
    const double oy = static_cast<double>(p / cols) * (ph + mt + gap) + mt;
    ++p;
    auto sx = [&](double x) { return ox + x / x_max * pw; };
    auto sy = [&](double y) { return oy + (1.0 - y) * ph; };

    svg << "<g>\n<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(ox) << "\" y=\"" << num(oy - 6) << "\">" << to_string(panel.first)
        << " / " << to_string(panel.second) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
      const double y = t / 4.0;
      svg << "<text x=\"" << num(ox - 6) << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">"
          << num(y) << "</text>\n";
      const double x = x_max * t / 4.0;
      svg << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(oy + ph + 14)
          << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
    }
    for (const auto& [gram, pts] : series) {
      grams.insert(gram);
      const char* colour = kPalette[gram % std::size(kPalette)];
      for (const auto& pt : pts) {
        svg << "<circle cx=\"" << num(sx(pt.x)) << "\" cy=\"" << num(sy(pt.y)) << "\" r=\"2.5\" fill=\""
            << colour << "\" fill-opacity=\"0.7\"/>\n";
      }
      try {
        const auto fit = fit_quadratic_trend(pts);
        double lo = pts.front().x, hi = pts.front().x;
        for (const auto& pt : pts) {
          lo = std::min(lo, pt.x);
          hi = std::max(hi, pt.x);
        }
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (int s = 0; s <= 40; ++s) {
          const double x = lo + (hi - lo) * s / 40.0;
          const double y = std::clamp(fit.c0 + fit.c1 * x + fit.c2 * x * x, -0.05, 1.05);
          svg << num(sx(x)) << ',' << num(sy(y)) << ' ';
        }
        svg << "\"/>\n";
      } catch (const RankDeficientError&) {
      }
    }
    svg << "</g>\n";
  }
  const double lx = static_cast<double>(cols) * (pw + ml + gap);
  double ly = mt + 10;
  for (auto gram : grams) {
    svg << "<circle cx=\"" << num(lx) << "\" cy=\"" << num(ly) << "\" r=\"4\" fill=\""
        << kPalette[gram % std::size(kPalette)] << "\"/>\n";
    svg << "<text x=\"" << num(lx + 10) << "\" y=\"" << num(ly + 4) << "\">" << gram << "-gram</text>\n";
    ly += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void emit_report(std::span<const SweepResult> results, const fs::path& out_dir) {
  if (results.empty()) throw EmptyInputError("no sweep results to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::string csv = results_csv(results);
  write_file(out_dir / "results.csv", csv);
  // Trends are fitted on the values as written so that a re-emit reproduces them.
  const auto written = parse_results_csv(csv);
  write_file(out_dir / "trends.csv", trends_csv(compute_trends(written)));
  std::set<Family> families;
  for (const auto& r : results) families.insert(r.family);
  for (auto f : families) {
    write_file(out_dir / ("plot_" + std::string(to_string(f)) + ".svg"), family_plot_svg(results, f));
  }
}

}  // namespace obfbench
