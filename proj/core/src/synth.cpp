#include "obfbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obfbench/error.hpp"
#include "obfbench/rng.hpp"

namespace obfbench {

using nlohmann::json;

void SynthSpec::validate() const {
  if (n_malware == 0 || n_goodware == 0) throw SpecError("synth: class counts must be >= 1");
  if (trace_length == 0) throw SpecError("synth: trace_length must be >= 1");
  if (!(divergence >= 0.0 && divergence <= 1.0)) throw SpecError("synth: divergence must lie in [0, 1]");
}

namespace {

// Uniform random positives, normalized.
std::vector<double> random_row(RandomStream rng, std::size_t k) {
  std::vector<double> row(k);
  double sum = 0.0;
  for (auto& v : row) {
    v = static_cast<double>((rng.next() >> 11) + 1) * 0x1.0p-53;
    sum += v;
  }
  for (auto& v : row) v /= sum;
  return row;
}

TransitionMatrix blend(const RandomStream& root, std::string_view own_tag, std::size_t k,
                       double divergence) {
  const RandomStream base = root.split("base");
  const RandomStream own = root.split(own_tag);
  TransitionMatrix m{k, std::vector<double>(k * k)};
  for (std::size_t r = 0; r < k; ++r) {
    auto b = random_row(base.split(r), k);
    auto o = random_row(own.split(r), k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = (1.0 - divergence) * b[c] + divergence * o[c];
      m.p[r * k + c] = v;
      sum += v;
    }
    for (std::size_t c = 0; c < k; ++c) m.p[r * k + c] /= sum;
  }
  return m;
}

std::vector<double> cumulative(const TransitionMatrix& m) {
  std::vector<double> cdf(m.p.size());
  for (std::size_t r = 0; r < m.states; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.states; ++c) {
      acc += m.p[r * m.states + c];
      cdf[r * m.states + c] = acc;
    }
    cdf[r * m.states + m.states - 1] = 1.0;
  }
  return cdf;
}

std::string trace_id(Label label, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu", label == Label::malware ? "mal" : "good", i);
  return buf;
}

Trace sample_trace(const Catalog& catalog, const std::vector<double>& cdf, std::size_t length,
                   RandomStream rng, std::string id, Label label) {
  const std::size_t k = catalog.size();
  Trace t{std::move(id), label, {}, false};
  t.events.reserve(length);
  std::size_t state = rng.below(k);
  std::size_t resource = 0;
  for (std::size_t step = 0; step < length; ++step) {
    if (step > 0) {
      const double u = rng.uniform01();
      const auto row = cdf.begin() + static_cast<std::ptrdiff_t>(state * k);
      state = static_cast<std::size_t>(std::upper_bound(row, row + static_cast<std::ptrdiff_t>(k), u) - row);
      if (state >= k) state = k - 1;
    }
    SyscallEvent ev{catalog.name(static_cast<NameId>(state)), {}, false};
    if (catalog.is_side_effect(static_cast<NameId>(state))) {
      ev.params.push_back("res_" + t.id + "_" + std::to_string(resource++));
    }
    t.events.push_back(std::move(ev));
  }
  return t;
}

}  // namespace

ClassChains build_chains(const SynthSpec& spec, const Catalog& catalog) {
  spec.validate();
  const RandomStream root(spec.seed);
  const std::size_t k = catalog.size();
  return {blend(root, "malware", k, spec.divergence), blend(root, "goodware", k, spec.divergence)};
}

Corpus generate_corpus(const SynthSpec& spec, const Catalog& catalog) {
  const auto chains = build_chains(spec, catalog);
  const auto mal_cdf = cumulative(chains.malware);
  const auto good_cdf = cumulative(chains.goodware);
  const RandomStream traces = RandomStream(spec.seed).split("trace");

  Corpus corpus;
  corpus.traces.reserve(spec.n_malware + spec.n_goodware);
  for (std::size_t i = 0; i < spec.n_malware; ++i) {
    corpus.traces.push_back(sample_trace(catalog, mal_cdf, spec.trace_length, traces.split(i),
                                         trace_id(Label::malware, i), Label::malware));
  }
  for (std::size_t i = 0; i < spec.n_goodware; ++i) {
    const std::size_t index = spec.n_malware + i;
    corpus.traces.push_back(sample_trace(catalog, good_cdf, spec.trace_length, traces.split(index),
                                         trace_id(Label::goodware, i), Label::goodware));
  }
  return corpus;
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("synth spec: top level must be an object");
  SynthSpec spec;
  try {
    auto count = [&](const char* key, std::size_t& dst) {
      if (!doc.contains(key)) return;
      const auto& v = doc[key];
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw SpecError(std::string("synth spec: '") + key + "' must be a non-negative integer");
      dst = v.get<std::size_t>();
    };
    count("n_malware", spec.n_malware);
    count("n_goodware", spec.n_goodware);
    count("trace_length", spec.trace_length);
    if (doc.contains("divergence")) spec.divergence = doc["divergence"].get<double>();
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open synth spec: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_synth_spec(buf.str());
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  json doc{{"n_malware", spec.n_malware},
           {"n_goodware", spec.n_goodware},
           {"trace_length", spec.trace_length},
           {"divergence", spec.divergence},
           {"seed", spec.seed}};
  return doc.dump(2) + "\n";
}

SynthSpec default_synth_spec() { return SynthSpec{100, 100, 500, 0.6, 7}; }

}  // namespace obfbench
