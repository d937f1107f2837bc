// obfbench: command-line front end for corpus generation, obfuscation,
// featurization, training, evaluation and parameter sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "obfbench/catalog.hpp"
#include "obfbench/classify.hpp"
#include "obfbench/error.hpp"
#include "obfbench/features.hpp"
#include "obfbench/harness.hpp"
#include "obfbench/obfuscate.hpp"
#include "obfbench/synth.hpp"
#include "obfbench/trace.hpp"

namespace fs = std::filesystem;
using namespace obfbench;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string catalog;
  std::string out;
};

Catalog resolve_catalog(const GlobalOptions& g) {
  return g.catalog.empty() ? default_catalog() : load_catalog(g.catalog);
}

std::string require_out(const GlobalOptions& g, const char* what) {
  if (g.out.empty()) throw SpecError(std::string("--out is required: ") + what);
  return g.out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-obfuscation evaluation harness for n-gram malware detectors"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed override (corpus seed, profile seed or sweep master seed)");
  app.add_option("--catalog", g.catalog, "Catalog JSON (default: built-in 20-call catalog)");
  app.add_option("--out", g.out, "Output file or directory");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a labeled synthetic corpus");
  std::string synth_path;
  gen->add_option("--spec", synth_path, "SynthSpec JSON (default: calibrated desk-scale spec)");

  // obfuscate
  auto* obf = app.add_subcommand("obfuscate", "Apply an obfuscation profile to a corpus");
  std::string profile_path, in_manifest;
  bool include_goodware = false;
  obf->add_option("--profile", profile_path, "Profile JSON")->required();
  obf->add_option("--in", in_manifest, "Input corpus manifest")->required();
  obf->add_flag("--include-goodware", include_goodware, "Also obfuscate goodware traces");

  // featurize
  auto* feat = app.add_subcommand("featurize", "Dump n-gram features as JSON Lines");
  std::size_t gram = 3;
  std::string mode_text = "ordered";
  feat->add_option("--in", in_manifest, "Corpus manifest")->required();
  feat->add_option("--n", gram, "n-gram size")->check(CLI::Range(2, 1 << 20));
  feat->add_option("--mode", mode_text, "ordered | unordered");

  // train
  auto* train = app.add_subcommand("train", "Train a classifier on a clean corpus");
  std::string algorithm_text = "naive_bayes";
  train->add_option("--in", in_manifest, "Corpus manifest")->required();
  train->add_option("--n", gram, "n-gram size")->check(CLI::Range(2, 1 << 20));
  train->add_option("--mode", mode_text, "ordered | unordered");
  train->add_option("--algorithm", algorithm_text, "naive_bayes | nearest_centroid");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Detection rate of a model on a corpus's malware");
  std::string model_path;
  eval->add_option("--model", model_path, "Model JSON")->required();
  eval->add_option("--in", in_manifest, "Corpus manifest")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the obfuscation parameter sweep");
  std::string grid_path, corpus_manifest;
  bool dry_run = false;
  unsigned threads = 0;
  sweep->add_option("--grid", grid_path, "GridSpec JSON (default: 375-cell grid)");
  sweep->add_option("--corpus", corpus_manifest, "Corpus manifest");
  sweep->add_flag("--dry-run", dry_run, "Only enumerate and count cells");
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  // report
  auto* report = app.add_subcommand("report", "Re-emit trends and plots from results.csv");
  std::string results_path;
  report->add_option("--results", results_path, "results.csv from a sweep")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const Catalog catalog = resolve_catalog(g);
      SynthSpec spec = synth_path.empty() ? default_synth_spec() : load_synth_spec(synth_path);
      if (g.seed) spec.seed = *g.seed;
      const auto manifest = write_corpus(generate_corpus(spec, catalog), require_out(g, "corpus directory"));
      std::cout << manifest.string() << '\n';
    } else if (obf->parsed()) {
      const Catalog catalog = resolve_catalog(g);
      ObfuscationProfile profile = load_profile(profile_path);
      if (g.seed) profile.seed = *g.seed;
      const Corpus corpus = read_corpus(in_manifest);
      const auto manifest = write_corpus(obfuscate_corpus(corpus, profile, catalog, include_goodware),
                                         require_out(g, "output corpus directory"));
      std::cout << manifest.string() << '\n';
    } else if (feat->parsed()) {
      const Catalog catalog = resolve_catalog(g);
      const FeatureConfig config{gram, parse_gram_mode(mode_text)};
      const Corpus corpus = read_corpus(in_manifest);
      std::string dump;
      for (const auto& t : corpus.traces) {
        const auto fv = featurize(t, config, catalog);
        if (fv.short_trace) std::cerr << "warning: trace " << t.id << " is shorter than n\n";
        dump += feature_dump_jsonl(fv, catalog);
      }
      write_text(g.out, dump);
    } else if (train->parsed()) {
      const Catalog catalog = resolve_catalog(g);
      const FeatureConfig config{gram, parse_gram_mode(mode_text)};
      const Corpus corpus = read_corpus(in_manifest);
      std::vector<TrainingSample> samples;
      for (const auto& t : corpus.traces) samples.push_back({featurize(t, config, catalog), t.label});
      const auto model = TrainedModel::train(samples, parse_algorithm(algorithm_text), catalog);
      write_text(g.out, model.to_json());
    } else if (eval->parsed()) {
      const Catalog catalog = resolve_catalog(g);
      const TrainedModel model = load_model(model_path);
      const Corpus corpus = read_corpus(in_manifest);
      std::vector<FeatureVector> malware;
      for (const auto& t : corpus.traces)
        if (t.label == Label::malware) malware.push_back(featurize(t, model.config(), catalog));
      const double rate = detection_rate(model, malware);
      char line[128];
      std::snprintf(line, sizeof line, "{\"detection_rate\": %.6f, \"malware_samples\": %zu}\n", rate,
                    malware.size());
      write_text(g.out, line);
    } else if (sweep->parsed()) {
      GridSpec spec = grid_path.empty() ? full_grid_spec() : load_grid_spec(grid_path);
      if (g.seed) spec.master_seed = *g.seed;
      const auto cells = enumerate_grid(spec);
      const std::size_t rows = cells.size() * spec.gram_sizes.size() * spec.modes.size() * spec.classifiers.size();
      if (dry_run) {
        std::cout << "cells: " << cells.size() << "\nresult rows: " << rows << '\n';
        return 0;
      }
      if (corpus_manifest.empty()) throw SpecError("sweep needs --corpus (or --dry-run)");
      const Catalog catalog = resolve_catalog(g);
      const Corpus corpus = read_corpus(corpus_manifest);
      SweepOptions options;
      options.threads = threads;
      options.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\rcells " << done << "/" << total << std::flush;
        if (done == total) std::cerr << '\n';
      };
      const auto results = run_cells(corpus, spec, cells, catalog, options);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.error ? 1 : 0;
      emit_report(results, require_out(g, "report directory"));
      if (failed) {
        std::cerr << "error: " << failed << " result rows failed\n";
        return 2;
      }
    } else if (report->parsed()) {
      emit_report(load_results_csv(results_path), require_out(g, "report directory"));
    }
  } catch (const obfbench::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
