#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fewshot/corpus.h"
#include "fewshot/error.h"

namespace fewshot {
namespace {

TEST(ParseBio, AcceptsTheThreeShapes) {
  auto o = parse_bio("O");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->kind, Bio::kO);
  auto b = parse_bio("B-weather");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->kind, Bio::kB);
  EXPECT_EQ(b->slot, "weather");
  auto i = parse_bio("I-time_range");
  ASSERT_TRUE(i);
  EXPECT_EQ(i->slot, "time_range");
  EXPECT_EQ(format_bio(*i), "I-time_range");
}

TEST(ParseBio, RejectsOthers) {
  for (const char* bad : {"", "B-", "X-city", "o", "B_city", "Bcity", "I"}) {
    EXPECT_FALSE(parse_bio(bad)) << bad;
  }
}

TEST(LabelSet, CanonicalOrder) {
  LabelSet set({"time", "city", "city"});
  const std::vector<std::string> want = {"O", "B-city", "I-city", "B-time", "I-time"};
  EXPECT_EQ(set.bio_labels(), want);
  EXPECT_EQ(set.size(), 5u);
  EXPECT_EQ(set.id("O"), 0);
  EXPECT_EQ(set.id("I-time"), 4);
  EXPECT_EQ(set.label(3), "B-time");
  EXPECT_THROW(set.id("B-date"), Error);
  EXPECT_EQ(set.decode(set.encode({"O", "B-city", "I-city"})),
            (std::vector<std::string>{"O", "B-city", "I-city"}));
}

TEST(LabelSet, FifteenSlotsGiveThirtyOneLabels) {
  std::vector<std::string> slots;
  for (int i = 0; i < 15; ++i) slots.push_back("s" + std::to_string(i));
  EXPECT_EQ(LabelSet(slots).size(), 31u);
}

TEST(LabelSet, FromBioLabelsRoundTrip) {
  LabelSet set({"b", "a"});
  EXPECT_EQ(LabelSet::from_bio_labels(set.bio_labels()), set);
  EXPECT_THROW(LabelSet::from_bio_labels({"B-a", "O", "I-a"}), ParseError);
}

TEST(ParseConll, ReadsSentencesAndBuildsLabels) {
  const Domain d = parse_conll("what\tO\nweather\tB-weather\n\n\n\nin\tO\nparis\tB-city\n", "w");
  ASSERT_EQ(d.sentences.size(), 2u);
  EXPECT_EQ(d.sentences[1].tokens, (std::vector<std::string>{"in", "paris"}));
  EXPECT_EQ(d.label_set.slots(), (std::vector<std::string>{"city", "weather"}));
}

TEST(ParseConll, ErrorsNameTheLine) {
  try {
    parse_conll("a\tO\nb\tB-x\nc\tQ-y\n", "d");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("Q-y"), std::string::npos);
  }
  EXPECT_THROW(parse_conll("a O\n", "d"), ParseError);
  EXPECT_THROW(parse_conll("", "d"), ParseError);
  EXPECT_THROW(parse_conll("\n\n", "d"), ParseError);
}

TEST(ParseConll, LenientIngestionKeepsIAfterO) {
  const Domain d = parse_conll("a\tO\nb\tI-x\n", "d");
  EXPECT_EQ(d.sentences[0].labels[1], "I-x");
  EXPECT_TRUE(validate_bio(d.sentences[0], false).empty());
  const auto strict = validate_bio(d.sentences[0], true);
  ASSERT_EQ(strict.size(), 1u);
  EXPECT_EQ(strict[0].index, 1u);
}

TEST(ValidateBio, StrictAcceptsWellFormed) {
  Sentence s{{"a", "b", "c", "d"}, {"B-x", "I-x", "B-y", "I-y"}};
  EXPECT_TRUE(validate_bio(s, true).empty());
  Sentence t{{"a", "b"}, {"B-x", "I-y"}};
  EXPECT_EQ(validate_bio(t, true).size(), 1u);
}

TEST(DomainFiles, ConllAndJsonRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "fewshot_corpus_test";
  std::filesystem::create_directories(dir);
  const Domain d = parse_conll("play\tO\nabba\tB-artist\nnow\tO\n\nrain\tB-weather\n", "music");
  write_conll(d, dir / "music.conll");
  EXPECT_EQ(load_domain(dir / "music.conll"), d);
  write_json(d, dir / "music.json");
  EXPECT_EQ(load_domain(dir / "music.json"), d);
  std::ofstream(dir / "broken.json") << "{\"name\": \"x\"}";
  EXPECT_THROW(load_domain(dir / "broken.json"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(ParseJson, RejectsMismatchedLengths) {
  EXPECT_THROW(parse_json(R"({"name":"d","sentences":[{"tokens":["a","b"],"labels":["O"]}]})"),
               ParseError);
}

}  // namespace
}  // namespace fewshot
