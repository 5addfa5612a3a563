#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mmslu/data.hpp"
#include "mmslu/error.hpp"
#include "support/fixtures.hpp"

using namespace mmslu;
namespace fs = std::filesystem;

namespace {

Utterance make(std::string id, std::vector<std::string> tokens, std::vector<std::string> tags,
               std::optional<std::string> intent) {
  Utterance u;
  u.id = std::move(id);
  u.tokens = std::move(tokens);
  u.tags = std::move(tags);
  u.intent = std::move(intent);
  return u;
}

Corpus labelled(std::size_t a, std::size_t b) {
  Corpus c;
  for (std::size_t i = 0; i < a + b; ++i) {
    c.utterances.push_back(make("u" + std::to_string(i), {"stop"}, {"IntentKeyword"},
                                i < a ? "Stop" : "Park"));
  }
  return c;
}

template <class F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Corpus, LengthMismatchNamesUtterance) {
  const auto dir = support::scratch_dir("corpus");
  support::write_file(dir / "c.jsonl",
                      R"({"id":"utt-7","tokens":["a","b","c","d"],"tags":["O","O","O"],"intent":"Stop"})"
                      "\n");
  const std::string msg = message_of([&] { load_corpus(dir / "c.jsonl"); });
  EXPECT_NE(msg.find("utt-7"), std::string::npos);
  EXPECT_THROW(load_corpus(dir / "c.jsonl"), ValidationError);
}

TEST(Corpus, UnknownTagListsAllowedLabels) {
  const auto dir = support::scratch_dir("corpus");
  support::write_file(dir / "c.jsonl",
                      R"({"id":"u1","tokens":["the","car"],"tags":["O","Vehicle"],"intent":"Stop"})"
                      "\n");
  const std::string msg = message_of([&] { load_corpus(dir / "c.jsonl"); });
  EXPECT_NE(msg.find("Vehicle"), std::string::npos);
  const LabelSet allowed = default_tag_set();
  for (const auto& tag : allowed.labels()) EXPECT_NE(msg.find(tag), std::string::npos) << tag;
}

TEST(Corpus, OtherValidationErrors) {
  Corpus c;
  c.utterances.push_back(make("a", {"x"}, {"O"}, "Stop"));
  c.utterances.push_back(make("a", {"y"}, {"O"}, "Stop"));
  EXPECT_THROW(validate_corpus(c), ValidationError);
  c.utterances[1].id = "b";
  EXPECT_NO_THROW(validate_corpus(c));
  c.utterances[1].intent = "Fly";
  EXPECT_THROW(validate_corpus(c), ValidationError);
  c.utterances[1].intent.reset();  // non-command utterance is fine
  EXPECT_NO_THROW(validate_corpus(c));
  c.utterances[1].tokens.clear();
  c.utterances[1].tags.clear();
  EXPECT_THROW(validate_corpus(c), ValidationError);
}

TEST(Corpus, MalformedJsonIsFormatError) {
  const auto dir = support::scratch_dir("corpus");
  support::write_file(dir / "c.jsonl", "{\"id\": \"u\", \"tokens\": [\n");
  EXPECT_THROW(load_corpus(dir / "c.jsonl"), FormatError);
  support::write_file(dir / "d.jsonl", R"({"tokens":["a"],"tags":["O"]})" "\n");
  EXPECT_THROW(load_corpus(dir / "d.jsonl"), FormatError);
}

TEST(Corpus, WriteLoadRoundTrip) {
  Corpus c;
  c.utterances.push_back(make("u1", {"pull", "over", "there"}, {"IntentKeyword", "IntentKeyword", "Location"},
                              "PullOver"));
  c.utterances.push_back(make("u2", {"nice", "weather"}, {"O", "O"}, std::nullopt));
  c.utterances[0].acoustic_ref = "a1";
  c.utterances[0].visual_road_ref = "r1";
  c.utterances[1].session = "s2";
  const auto dir = support::scratch_dir("corpus_rt");
  write_corpus(dir / "c.jsonl", c);
  EXPECT_EQ(load_corpus(dir / "c.jsonl"), c);
}

TEST(Corpus, StatsAndVocabulary) {
  Corpus c = labelled(3, 2);
  c.utterances.push_back(make("n", {"hello", "stop"}, {"O", "O"}, std::nullopt));
  const auto stats = corpus_stats(c);
  EXPECT_EQ(stats.utterances, 6u);
  EXPECT_EQ(stats.with_intent, 5u);
  EXPECT_EQ(stats.tokens, 7u);
  EXPECT_EQ(corpus_vocabulary(c), (std::vector<std::string>{"hello", "stop"}));
}

TEST(Splits, KFoldPartitionsAllUtterances) {
  const Corpus c = labelled(10, 0);
  const auto folds = kfold_split(c, 5, 42, false);
  ASSERT_EQ(folds.size(), 5u);
  std::multiset<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.test.size(), 2u);
    EXPECT_EQ(f.train.size(), 8u);
    seen.insert(f.test.begin(), f.test.end());
    std::set<std::size_t> all(f.train.begin(), f.train.end());
    for (std::size_t i : f.test) EXPECT_FALSE(all.contains(i));
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), 10u);
}

TEST(Splits, StratifiedKFoldKeepsClassRatio) {
  const Corpus c = labelled(90, 10);
  for (const auto& f : kfold_split(c, 10, 3, true)) {
    std::size_t a = 0, b = 0;
    for (std::size_t i : f.test) (*c.utterances[i].intent == "Stop" ? a : b)++;
    EXPECT_EQ(a, 9u);
    EXPECT_EQ(b, 1u);
  }
}

TEST(Splits, DeterministicUnderSeed) {
  const Corpus c = labelled(30, 7);
  const auto x = kfold_split(c, 4, 9, true);
  const auto y = kfold_split(c, 4, 9, true);
  const auto z = kfold_split(c, 4, 10, true);
  bool differs = false;
  for (std::size_t f = 0; f < 4; ++f) {
    EXPECT_EQ(x[f].test, y[f].test);
    differs = differs || x[f].test != z[f].test;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(holdout_split(c, 0.3, 5, true).test, holdout_split(c, 0.3, 5, true).test);
}

TEST(Splits, InvalidArguments) {
  const Corpus c = labelled(4, 0);
  EXPECT_THROW(kfold_split(c, 5, 1, false), InvalidArgument);
  EXPECT_THROW(kfold_split(c, 1, 1, false), InvalidArgument);
  EXPECT_THROW(holdout_split(c, 0.0, 1, false), InvalidArgument);
  EXPECT_THROW(holdout_split(c, 1.0, 1, false), InvalidArgument);
}

TEST(Splits, HoldoutSizesAndStratification) {
  const Corpus c = labelled(80, 20);
  const Fold f = holdout_split(c, 0.2, 11, true);
  EXPECT_EQ(f.test.size(), 20u);
  EXPECT_EQ(f.train.size(), 80u);
  std::size_t b = 0;
  for (std::size_t i : f.test) b += *c.utterances[i].intent == "Park";
  EXPECT_EQ(b, 4u);
}

TEST(Bio, ConvertsRuns) {
  const std::vector<std::string> tags{"O", "Location", "Location", "O", "Person", "Location"};
  EXPECT_EQ(to_bio(tags), (std::vector<std::string>{"O", "B-Location", "I-Location", "O", "B-Person",
                                                    "B-Location"}));
}

TEST(Features, StrictModeNamesUtterance) {
  Corpus c = labelled(2, 0);
  c.utterances[0].acoustic_ref = "u0";
  c.utterances[1].acoustic_ref = "missing";
  FeatureMap acoustic{{"u0", Vector{1.0, 2.0}}};
  FeatureSources src;
  src.acoustic = &acoustic;
  const std::string msg = message_of([&] { attach_features(c, src); });
  EXPECT_NE(msg.find("u1"), std::string::npos);
  EXPECT_THROW(attach_features(c, src), DataError);
}

TEST(Features, ZeroFillWarnsAndKeepsDimension) {
  Corpus c = labelled(2, 0);
  c.utterances[0].visual_cabin_ref = "u0";
  FeatureMap cabin{{"u0", Vector{1.0, 2.0, 3.0}}};
  FeatureSources src;
  src.visual_cabin = &cabin;
  const auto out = attach_features(c, src);
  EXPECT_EQ(out.warnings, 1u);
  ASSERT_EQ(out.missing.size(), 1u);
  EXPECT_NE(out.missing[0].find("u1"), std::string::npos);
  EXPECT_EQ(*out.features[0].visual_cabin, (Vector{1.0, 2.0, 3.0}));
  EXPECT_EQ(*out.features[1].visual_cabin, (Vector{0.0, 0.0, 0.0}));
  EXPECT_FALSE(out.features[1].acoustic.has_value());
}
