#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "obfbench/error.hpp"
#include "obfbench/features.hpp"
#include "oracles.hpp"

using namespace obfbench;

namespace {

const Catalog& abcd() {
  static const Catalog c = Catalog::create({"A", "B", "C", "D", "E"}, {}, {});
  return c;
}

Trace names_trace(const std::vector<std::string>& names) {
  Trace t{"t", Label::malware, {}, false};
  for (const auto& n : names) t.events.push_back({n, {}, false});
  return t;
}

Token tok(const std::vector<std::string>& names, GramMode mode) {
  return encode_token(to_name_ids(names, abcd()), mode, abcd());
}

}  // namespace

TEST(OrderedNgrams, SlidingWindows) {
  const std::vector<std::string> s{"A", "B", "C", "D", "E"};
  const auto w = extract_ordered_ngrams(s, 4);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (std::vector<std::string>{"A", "B", "C", "D"}));
  EXPECT_EQ(w[1], (std::vector<std::string>{"B", "C", "D", "E"}));
  EXPECT_TRUE(extract_ordered_ngrams(std::vector<std::string>{"A", "B", "C"}, 4).empty());
  for (std::size_t len = 4; len < 20; ++len) {
    EXPECT_EQ(extract_ordered_ngrams(std::vector<std::string>(len, "A"), 4).size(), len - 3);
  }
}

TEST(UnorderedVectors, CountsPerWindow) {
  const Catalog c = Catalog::create({"A", "B", "C", "D"}, {}, {});
  const auto v = extract_unordered_vectors(std::vector<std::string>{"A", "B", "A", "C"}, 4, c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (std::vector<std::uint32_t>{2, 1, 1, 0}));
  const auto x = extract_unordered_vectors(std::vector<std::string>{"A", "B", "C", "D"}, 4, c);
  const auto y = extract_unordered_vectors(std::vector<std::string>{"D", "C", "B", "A"}, 4, c);
  EXPECT_EQ(x, y);
}

TEST(UnorderedVectors, EachVectorSumsToN) {
  std::mt19937_64 gen(4);
  const auto t = obfbench::testing::random_trace(gen, default_catalog(), 100);
  for (std::size_t n = 2; n <= 10; ++n) {
    const auto v = extract_unordered_vectors(project_names(t), n, default_catalog());
    ASSERT_EQ(v.size(), 100 - n + 1);
    for (const auto& row : v) {
      std::uint32_t sum = 0;
      for (auto x : row) sum += x;
      ASSERT_EQ(sum, n);
    }
  }
}

TEST(UnorderedVectors, UnknownNameRejected) {
  EXPECT_THROW((void)extract_unordered_vectors(std::vector<std::string>{"A", "Z"}, 2, abcd()),
               UnknownNameError);
}

TEST(Featurize, OrderedEnumeration) {
  const auto fv = featurize(names_trace({"A", "B", "A", "B", "A"}), FeatureConfig{3, GramMode::ordered}, abcd());
  ASSERT_EQ(fv.tokens.size(), 2u);
  EXPECT_EQ(fv.tokens.at(tok({"A", "B", "A"}, GramMode::ordered)), 2u);
  EXPECT_EQ(fv.tokens.at(tok({"B", "A", "B"}, GramMode::ordered)), 1u);
  EXPECT_EQ(fv.total_count(), 3u);
}

TEST(Featurize, UnorderedEnumeration) {
  const auto fv = featurize(names_trace({"A", "B", "A", "B", "A"}), FeatureConfig{3, GramMode::unordered}, abcd());
  ASSERT_EQ(fv.tokens.size(), 2u);
  EXPECT_EQ(fv.tokens.at(tok({"A", "A", "B"}, GramMode::unordered)), 2u);
  EXPECT_EQ(fv.tokens.at(tok({"A", "B", "B"}, GramMode::unordered)), 1u);
  const auto perm = featurize(names_trace({"A", "A", "B", "A", "B"}), FeatureConfig{3, GramMode::unordered}, abcd());
  EXPECT_EQ(perm.tokens, fv.tokens);
}

TEST(Featurize, ReversedTraceSameUnorderedBag) {
  std::mt19937_64 gen(6);
  for (int i = 0; i < 50; ++i) {
    auto t = obfbench::testing::random_trace(gen, default_catalog(), 40);
    auto r = t;
    std::reverse(r.events.begin(), r.events.end());
    const FeatureConfig cfg{4, GramMode::unordered};
    EXPECT_EQ(featurize(t, cfg, default_catalog()).tokens, featurize(r, cfg, default_catalog()).tokens);
  }
}

TEST(Featurize, ShortTraceFlagged) {
  const auto fv = featurize(names_trace({"A", "B"}), FeatureConfig{3, GramMode::ordered}, abcd());
  EXPECT_TRUE(fv.short_trace);
  EXPECT_TRUE(fv.tokens.empty());
}

TEST(Featurize, RejectsBadConfigAndUnknownNames) {
  EXPECT_THROW((void)featurize(names_trace({"A", "B"}), FeatureConfig{1, GramMode::ordered}, abcd()), ParamError);
  EXPECT_THROW((void)featurize(names_trace({"A", "Q", "B"}), FeatureConfig{2, GramMode::ordered}, abcd()),
               UnknownNameError);
}

TEST(Featurize, WindowCountLaw) {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 200; ++i) {
    const std::size_t len = gen() % 40;
    const auto t = obfbench::testing::random_trace(gen, default_catalog(), len);
    const std::size_t n = 2 + gen() % 9;
    for (auto mode : {GramMode::ordered, GramMode::unordered}) {
      const auto fv = featurize(t, FeatureConfig{n, mode}, default_catalog());
      ASSERT_EQ(fv.total_count(), len >= n ? len - n + 1 : 0);
      for (const auto& [k, c] : fv.tokens) ASSERT_GE(c, 1u);
    }
  }
}

// Mapping each ordered token to its sorted multiset and summing counts must
// reproduce the unordered featurization.
TEST(Featurize, OrderedRefinesUnordered) {
  std::mt19937_64 gen(10);
  const Catalog& cat = default_catalog();
  for (int i = 0; i < 200; ++i) {
    const auto t = obfbench::testing::random_trace(gen, cat, 1 + gen() % 120);
    const std::size_t n = 2 + gen() % 9;
    const auto ordered = featurize(t, FeatureConfig{n, GramMode::ordered}, cat);
    const auto unordered = featurize(t, FeatureConfig{n, GramMode::unordered}, cat);

    std::map<std::vector<std::string>, std::uint32_t> folded, direct;
    for (const auto& [k, c] : ordered.tokens) {
      auto names = decode_token(k, cat);
      std::vector<NameId> ids = to_name_ids(names, cat);
      std::sort(ids.begin(), ids.end());
      std::vector<std::string> canon;
      for (auto id : ids) canon.push_back(cat.name(id));
      folded[canon] += c;
    }
    for (const auto& [k, c] : unordered.tokens) direct[decode_token(k, cat)] += c;
    ASSERT_EQ(folded, direct) << "trial " << i;
  }
}

TEST(Featurize, TokenCodecRoundTrip) {
  std::vector<std::string> many;
  for (int i = 0; i < 300; ++i) many.push_back("n" + std::to_string(i));
  const Catalog wide = Catalog::create(many, {}, {});
  const std::vector<std::string> window{"n0", "n299", "n255", "n256"};
  const auto ids = to_name_ids(window, wide);
  EXPECT_EQ(decode_token(encode_token(ids, GramMode::ordered, wide), wide), window);
  EXPECT_EQ(decode_token(encode_token(ids, GramMode::unordered, wide), wide),
            (std::vector<std::string>{"n0", "n255", "n256", "n299"}));
}

TEST(Featurize, DumpIsSortedJsonLines) {
  const auto fv = featurize(names_trace({"B", "A", "B", "A"}), FeatureConfig{2, GramMode::ordered}, abcd());
  EXPECT_EQ(feature_dump_jsonl(fv, abcd()),
            "{\"count\":1,\"token\":[\"A\",\"B\"],\"trace_id\":\"t\"}\n"
            "{\"count\":2,\"token\":[\"B\",\"A\"],\"trace_id\":\"t\"}\n");
}
