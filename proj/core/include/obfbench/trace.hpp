#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace obfbench {

enum class Label { malware, goodware };

[[nodiscard]] std::string_view to_string(Label label) noexcept;
/// Throws ParseError on anything other than "malware" / "goodware".
[[nodiscard]] Label parse_label(std::string_view text);

/// One monitored call. Parameters are opaque strings.
struct SyscallEvent {
  std::string name;
  std::vector<std::string> params;
  bool synthetic = false;

  friend bool operator==(const SyscallEvent&, const SyscallEvent&) = default;
};

/// The observable path of one sample.
struct Trace {
  std::string id;
  Label label = Label::malware;
  std::vector<SyscallEvent> events;
  /// Set by read_trace when the source file held no events.
  bool empty_file_warning = false;

  [[nodiscard]] std::size_t size() const noexcept { return events.size(); }

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.id == b.id && a.label == b.label && a.events == b.events;
  }
};

struct Corpus {
  std::vector<Trace> traces;

  /// Throws ValidationError when two traces share an id.
  void validate_unique_ids() const;
  [[nodiscard]] std::size_t count(Label label) const noexcept;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Read a JSON Lines event file. Blank lines are skipped; a malformed line
/// raises ParseError naming its 1-based line number.
[[nodiscard]] Trace read_trace(const std::filesystem::path& path, std::string id, Label label);
/// Parse JSON Lines text directly; same rules as read_trace.
[[nodiscard]] Trace parse_trace(std::string_view jsonl, std::string id, Label label);

/// Deterministic serialization: params always present, synthetic always present.
[[nodiscard]] std::string serialize_trace(const Trace& trace);
/// Throws IoError when the destination cannot be written.
void write_trace(const Trace& trace, const std::filesystem::path& path);

/// Name projection used by edit distance and featurization.
[[nodiscard]] std::vector<std::string> project_names(const Trace& trace);

/**
 * Corpus manifest: {"traces": [{"id", "label", "path"}...]}. Relative trace
 * paths resolve against the manifest's directory.
 */
[[nodiscard]] Corpus read_corpus(const std::filesystem::path& manifest);
/// Writes <dir>/manifest.json plus one <dir>/traces/<id>.jsonl per trace.
/// Returns the manifest path.
std::filesystem::path write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace obfbench
