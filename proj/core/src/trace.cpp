#include "obfbench/trace.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "obfbench/error.hpp"

namespace obfbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Label label) noexcept {
  return label == Label::malware ? "malware" : "goodware";
}

Label parse_label(std::string_view text) {
  if (text == "malware") return Label::malware;
  if (text == "goodware") return Label::goodware;
  throw ParseError("unknown label: " + std::string(text));
}

void Corpus::validate_unique_ids() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& t : traces) {
    if (!seen.insert(t.id).second) throw ValidationError("duplicate trace id in corpus: " + t.id);
  }
}

std::size_t Corpus::count(Label label) const noexcept {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.label == label ? 1 : 0;
  return n;
}

namespace {

std::string slurp(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + ": " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SyscallEvent parse_event(std::string_view line, std::size_t line_no) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("line " + std::to_string(line_no) + ": " + why);
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(e.what());
  }
  if (!doc.is_object()) throw fail("event must be a JSON object");
  auto name_it = doc.find("name");
  if (name_it == doc.end()) throw fail("missing \"name\" field");
  if (!name_it->is_string()) throw fail("\"name\" must be a string");

  SyscallEvent ev;
  ev.name = name_it->get<std::string>();
  if (ev.name.empty()) throw fail("\"name\" is empty");
  if (auto p = doc.find("params"); p != doc.end()) {
    if (!p->is_array()) throw fail("\"params\" must be an array");
    for (const auto& v : *p) {
      if (!v.is_string()) throw fail("\"params\" entries must be strings");
      ev.params.push_back(v.get<std::string>());
    }
  }
  if (auto s = doc.find("synthetic"); s != doc.end()) {
    if (!s->is_boolean()) throw fail("\"synthetic\" must be a boolean");
    ev.synthetic = s->get<bool>();
  }
  return ev;
}

}  // namespace

Trace parse_trace(std::string_view jsonl, std::string id, Label label) {
  Trace trace{std::move(id), label, {}, false};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    trace.events.push_back(parse_event(line, line_no));
  }
  trace.empty_file_warning = trace.events.empty();
  return trace;
}

Trace read_trace(const fs::path& path, std::string id, Label label) {
  return parse_trace(slurp(path, "trace file"), std::move(id), label);
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (const auto& ev : trace.events) {
    json doc = json::object();
    doc["name"] = ev.name;
    doc["params"] = ev.params;
    doc["synthetic"] = ev.synthetic;
    out += doc.dump();
    out += '\n';
  }
  return out;
}

void write_trace(const Trace& trace, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write trace file: " + path.string());
  out << serialize_trace(trace);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> project_names(const Trace& trace) {
  std::vector<std::string> names;
  names.reserve(trace.events.size());
  for (const auto& ev : trace.events) names.push_back(ev.name);
  return names;
}

Corpus read_corpus(const fs::path& manifest) {
  json doc;
  try {
    doc = json::parse(slurp(manifest, "corpus manifest"));
  } catch (const json::parse_error& e) {
    throw ParseError("manifest " + manifest.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("traces") || !doc["traces"].is_array()) {
    throw ParseError("manifest " + manifest.string() + ": expected {\"traces\": [...]}");
  }
  const fs::path base = manifest.parent_path();
  Corpus corpus;
  for (const auto& entry : doc["traces"]) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("label") ||
        !entry.contains("path")) {
      throw ParseError("manifest entry requires id, label and path");
    }
    fs::path p = entry["path"].get<std::string>();
    if (p.is_relative()) p = base / p;
    corpus.traces.push_back(read_trace(p, entry["id"].get<std::string>(),
                                       parse_label(entry["label"].get<std::string>())));
  }
  corpus.validate_unique_ids();
  return corpus;
}

fs::path write_corpus(const Corpus& corpus, const fs::path& dir) {
  corpus.validate_unique_ids();
  std::error_code ec;
  fs::create_directories(dir / "traces", ec);
  if (ec) throw IoError("cannot create directory " + (dir / "traces").string() + ": " + ec.message());

  json entries = json::array();
  for (const auto& t : corpus.traces) {
    const std::string rel = "traces/" + t.id + ".jsonl";
    write_trace(t, dir / rel);
    entries.push_back({{"id", t.id}, {"label", std::string(to_string(t.label))}, {"path", rel}});
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + manifest.string());
  out << json{{"traces", entries}}.dump(2) << '\n';
  return manifest;
}

}  // namespace obfbench
