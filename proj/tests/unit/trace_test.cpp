#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "obfbench/error.hpp"
#include "obfbench/trace.hpp"

using namespace obfbench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("obfbench_trace_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Trace random_trace(std::mt19937_64& gen, const std::string& id) {
  Trace t{id, gen() % 2 ? Label::malware : Label::goodware, {}, false};
  const int len = static_cast<int>(gen() % 30);
  for (int i = 0; i < len; ++i) {
    SyscallEvent ev;
    ev.name = "call" + std::to_string(gen() % 7);
    const int np = static_cast<int>(gen() % 3);
    for (int j = 0; j < np; ++j) {
      // Include characters that need JSON escaping.
      ev.params.push_back("p\"" + std::to_string(gen() % 100) + "\\\n\t\xc3\xa9");
    }
    ev.synthetic = gen() % 4 == 0;
    t.events.push_back(std::move(ev));
  }
  return t;
}

}  // namespace

TEST(ReadTrace, PreservesOrder) {
  auto dir = temp_dir("order");
  std::ofstream(dir / "t.jsonl") << R"({"name":"open","params":["a"]})" "\n"
                                 << R"({"name":"read"})" "\n"
                                 << R"({"name":"close","params":[]})" "\n";
  const Trace t = read_trace(dir / "t.jsonl", "t1", Label::malware);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(project_names(t), (std::vector<std::string>{"open", "read", "close"}));
  EXPECT_EQ(t.events[0].params, std::vector<std::string>{"a"});
  EXPECT_TRUE(t.events[1].params.empty());
  for (const auto& e : t.events) EXPECT_FALSE(e.synthetic);
  EXPECT_FALSE(t.empty_file_warning);
}

TEST(ReadTrace, MissingNameNamesTheLine) {
  const std::string text = "{\"name\":\"open\"}\n{\"params\":[\"x\"]}\n";
  try {
    (void)parse_trace(text, "t", Label::malware);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ReadTrace, RejectsMalformedFields) {
  EXPECT_THROW((void)parse_trace("not json\n", "t", Label::malware), ParseError);
  EXPECT_THROW((void)parse_trace(R"({"name":3})", "t", Label::malware), ParseError);
  EXPECT_THROW((void)parse_trace(R"({"name":"a","params":"x"})", "t", Label::malware), ParseError);
  EXPECT_THROW((void)parse_trace(R"({"name":"a","synthetic":"yes"})", "t", Label::malware), ParseError);
}

TEST(ReadTrace, EmptyFileWarns) {
  auto dir = temp_dir("empty");
  std::ofstream(dir / "e.jsonl").close();
  const Trace t = read_trace(dir / "e.jsonl", "e", Label::goodware);
  EXPECT_TRUE(t.events.empty());
  EXPECT_TRUE(t.empty_file_warning);
}

TEST(ReadTrace, MissingFileIsIoError) {
  EXPECT_THROW((void)read_trace("/nonexistent/x.jsonl", "x", Label::malware), IoError);
}

TEST(WriteTrace, RoundTripIsIdentityOnRandomTraces) {
  std::mt19937_64 gen(123);
  auto dir = temp_dir("roundtrip");
  for (int i = 0; i < 200; ++i) {
    const Trace t = random_trace(gen, "r" + std::to_string(i));
    write_trace(t, dir / "r.jsonl");
    const Trace back = read_trace(dir / "r.jsonl", t.id, t.label);
    ASSERT_EQ(back, t) << "iteration " << i;
    ASSERT_EQ(project_names(t).size(), t.events.size());
  }
}

TEST(WriteTrace, DeterministicBytes) {
  std::mt19937_64 gen(5);
  const Trace t = random_trace(gen, "d");
  auto dir = temp_dir("bytes");
  write_trace(t, dir / "a.jsonl");
  write_trace(t, dir / "b.jsonl");
  EXPECT_EQ(read_bytes(dir / "a.jsonl"), read_bytes(dir / "b.jsonl"));
}

TEST(WriteTrace, UnwritablePathIsIoError) {
  const Trace t{"x", Label::malware, {{"open", {}, false}}, false};
  EXPECT_THROW(write_trace(t, "/nonexistent/dir/x.jsonl"), IoError);
}

TEST(ProjectNames, IncludesSyntheticEvents) {
  const Trace t{"x", Label::malware,
                {{"open", {"a"}, false}, {"read", {"b"}, true}, {"close", {}, false}}, false};
  EXPECT_EQ(project_names(t), (std::vector<std::string>{"open", "read", "close"}));
  EXPECT_TRUE(project_names(Trace{}).empty());
}

TEST(Corpus, ManifestRoundTrip) {
  std::mt19937_64 gen(77);
  Corpus c;
  for (int i = 0; i < 10; ++i) c.traces.push_back(random_trace(gen, "id" + std::to_string(i)));
  auto dir = temp_dir("corpus");
  const auto manifest = write_corpus(c, dir);
  EXPECT_EQ(read_corpus(manifest), c);
}

TEST(Corpus, DuplicateIdsRejected) {
  Corpus c;
  c.traces.push_back(Trace{"a", Label::malware, {}, false});
  c.traces.push_back(Trace{"a", Label::goodware, {}, false});
  EXPECT_THROW(c.validate_unique_ids(), ValidationError);
}

TEST(Label, ParseAndPrint) {
  EXPECT_EQ(parse_label("malware"), Label::malware);
  EXPECT_EQ(to_string(Label::goodware), "goodware");
  EXPECT_THROW((void)parse_label("benign"), ParseError);
}
