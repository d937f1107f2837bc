#include "obfbench/obfuscate.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "obfbench/error.hpp"

namespace obfbench {

using nlohmann::json;

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void InsertionParams::validate() const {
  if (!is_probability(p_i)) throw ParamError("insertion: p_i must lie in [0, 1]");
  if (min_i > max_i) throw ParamError("insertion: min_i must not exceed max_i");
}

void ReorderingParams::validate() const {
  if (!is_probability(p_r)) throw ParamError("reordering: p_r must lie in [0, 1]");
  if (!is_probability(p_ri)) throw ParamError("reordering: p_ri must lie in [0, 1]");
  if (queue_size < 1) throw ParamError("reordering: queue_size must be >= 1");
  if (min_ri > max_ri) throw ParamError("reordering: min_ri must not exceed max_ri");
}

void ObfuscationProfile::validate() const {
  if (insertion) insertion->validate();
  if (reordering) reordering->validate();
}

RandomStream stage_stream(std::uint64_t profile_seed, std::string_view trace_id, Stage stage) {
  return RandomStream(profile_seed).split(trace_id).split(static_cast<std::uint64_t>(stage));
}

SyscallEvent neutralize(const SyscallEvent& event, std::string_view trace_id,
                        std::uint64_t counter) {
  SyscallEvent out;
  out.name = event.name;
  out.synthetic = true;
  out.params.reserve(event.params.size());
  const std::string prefix =
      "feebo_" + std::string(trace_id) + "_" + std::to_string(counter) + "_";
  for (std::size_t i = 0; i < event.params.size(); ++i) {
    out.params.push_back(prefix + std::to_string(i));
  }
  return out;
}

namespace {

// Prefix pool of insertable input events, shared by both transformations.
class InsertionPool {
 public:
  InsertionPool(const Trace& trace, const Catalog& catalog)
      : trace_(trace), catalog_(catalog) {}

  void offer(std::size_t index) {
    const auto& ev = trace_.events[index];
    if (!ev.synthetic && is_insertable(catalog_, ev.name)) members_.push_back(index);
  }

  // Appends `count` synthetic calls drawn from the pool; no-op when empty.
  void burst(std::uint64_t count, RandomStream& rng, std::uint64_t& counter,
             std::vector<SyscallEvent>& out) const {
    if (members_.empty()) return;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto& src = trace_.events[members_[rng.below(members_.size())]];
      if (catalog_.is_side_effect(src.name)) {
        out.push_back(neutralize(src, trace_.id, counter++));
      } else {
        SyscallEvent copy = src;
        copy.synthetic = true;
        out.push_back(std::move(copy));
      }
    }
  }

 private:
  const Trace& trace_;
  const Catalog& catalog_;
  std::vector<std::size_t> members_;
};

}  // namespace

Trace apply_insertion(const Trace& trace, const InsertionParams& params, const Catalog& catalog,
                      RandomStream& rng, std::uint64_t& neutralize_counter) {
  params.validate();
  Trace out{trace.id, trace.label, {}, trace.empty_file_warning};
  out.events.reserve(trace.events.size());
  InsertionPool pool(trace, catalog);
  for (std::size_t k = 0; k < trace.events.size(); ++k) {
    out.events.push_back(trace.events[k]);
    pool.offer(k);
    if (rng.bernoulli(params.p_i)) {
      const auto count = rng.uniform_int(params.min_i, params.max_i);
      pool.burst(count, rng, neutralize_counter, out.events);
    }
  }
  return out;
}

Trace apply_insertion(const Trace& trace, const InsertionParams& params, const Catalog& catalog,
                      RandomStream& rng) {
  std::uint64_t counter = 0;
  return apply_insertion(trace, params, catalog, rng, counter);
}

Trace apply_reordering(const Trace& trace, const ReorderingParams& params, const Catalog& catalog,
                       RandomStream& rng, std::uint64_t& neutralize_counter) {
  params.validate();
  Trace out{trace.id, trace.label, {}, trace.empty_file_warning};
  out.events.reserve(trace.events.size());
  InsertionPool pool(trace, catalog);
  std::deque<std::size_t> queue;

  auto flush = [&] {
    while (!queue.empty()) {
      out.events.push_back(trace.events[queue.front()]);
      queue.pop_front();
      if (rng.bernoulli(params.p_ri)) {
        const auto count = rng.uniform_int(params.min_ri, params.max_ri);
        pool.burst(count, rng, neutralize_counter, out.events);
      }
    }
  };

  for (std::size_t k = 0; k < trace.events.size(); ++k) {
    const auto& ev = trace.events[k];
    pool.offer(k);
    if (catalog.is_side_effect(ev.name) && rng.bernoulli(params.p_r)) {
      queue.push_back(k);
      if (queue.size() >= params.queue_size) flush();
    } else {
      out.events.push_back(ev);
    }
  }
  flush();
  return out;
}

Trace apply_reordering(const Trace& trace, const ReorderingParams& params, const Catalog& catalog,
                       RandomStream& rng) {
  std::uint64_t counter = 0;
  return apply_reordering(trace, params, catalog, rng, counter);
}

Trace apply_profile(const Trace& trace, const ObfuscationProfile& profile, const Catalog& catalog) {
  profile.validate();
  std::uint64_t counter = 0;
  Trace current = trace;
  if (profile.reordering) {
    auto rng = stage_stream(profile.seed, trace.id, Stage::reordering);
    current = apply_reordering(current, *profile.reordering, catalog, rng, counter);
  }
  if (profile.insertion) {
    auto rng = stage_stream(profile.seed, trace.id, Stage::insertion);
    current = apply_insertion(current, *profile.insertion, catalog, rng, counter);
  }
  return current;
}

Corpus obfuscate_corpus(const Corpus& corpus, const ObfuscationProfile& profile,
                        const Catalog& catalog, bool include_goodware) {
  Corpus out;
  out.traces.reserve(corpus.traces.size());
  for (const auto& t : corpus.traces) {
    if (t.label == Label::malware || include_goodware) {
      out.traces.push_back(apply_profile(t, profile, catalog));
    } else {
      out.traces.push_back(t);
    }
  }
  return out;
}

ObfuscationProfile parse_profile(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("profile: top level must be an object");

  ObfuscationProfile p;
  try {
    if (doc.contains("seed")) p.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("insertion") && !doc["insertion"].is_null()) {
      const auto& ins = doc["insertion"];
      p.insertion = InsertionParams{ins.at("p_i").get<double>(), ins.at("min_i").get<std::uint64_t>(),
                                    ins.at("max_i").get<std::uint64_t>()};
    }
    if (doc.contains("reordering") && !doc["reordering"].is_null()) {
      const auto& r = doc["reordering"];
      p.reordering = ReorderingParams{r.at("p_r").get<double>(), r.at("queue_size").get<std::uint64_t>(),
                                      r.at("p_ri").get<double>(), r.at("min_ri").get<std::uint64_t>(),
                                      r.at("max_ri").get<std::uint64_t>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

ObfuscationProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open profile: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_profile(buf.str());
}

std::string profile_to_json(const ObfuscationProfile& profile) {
  json doc;
  doc["seed"] = profile.seed;
  if (profile.insertion) {
    doc["insertion"] = {{"p_i", profile.insertion->p_i},
                        {"min_i", profile.insertion->min_i},
                        {"max_i", profile.insertion->max_i}};
  }
  if (profile.reordering) {
    doc["reordering"] = {{"p_r", profile.reordering->p_r},
                         {"queue_size", profile.reordering->queue_size},
                         {"p_ri", profile.reordering->p_ri},
                         {"min_ri", profile.reordering->min_ri},
                         {"max_ri", profile.reordering->max_ri}};
  }
  return doc.dump(2) + "\n";
}

}  // namespace obfbench
