#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fewshot/episodes.h"
#include "fewshot/error.h"
#include "fewshot/synthetic.h"
#include "oracles.h"

namespace fewshot {
namespace {

Sentence sent(std::vector<std::string> labels) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < labels.size(); ++i) tokens.push_back("w" + std::to_string(i));
  return {tokens, labels};
}

Domain weather_domain() {
  return make_domain("weather", {sent({"O", "B-city"}), sent({"B-time", "O"}), sent({"B-city", "I-city"}),
                                 sent({"O", "O"}), sent({"B-time", "I-time", "O"}), sent({"B-city", "B-time"})});
}

TEST(CountLabels, CountsBioLabels) {
  const auto counts = count_labels({sent({"B-a", "I-a", "O"}), sent({"B-a", "O"})});
  EXPECT_EQ(counts.at("B-a"), 2);
  EXPECT_EQ(counts.at("I-a"), 1);
  EXPECT_EQ(counts.at("O"), 2);
}

TEST(SampleSupport, CoversEveryLabelK1) {
  const Domain d = weather_domain();
  const auto domain_counts = oracle::count(d.sentences);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const SupportSet s = sample_support(d, 1, 0.0, rng);
    EXPECT_TRUE(oracle::covers(s.sentences, domain_counts, 1));
    EXPECT_TRUE(oracle::minimal(s.sentences, domain_counts, 1));
    EXPECT_EQ(s.label_counts, count_labels(s.sentences));
  }
}

TEST(SampleSupport, InfeasibleNamesTheLabel) {
  const Domain d = make_domain("tiny", {sent({"B-x", "O"}), sent({"B-y", "O"}), sent({"B-y", "I-y"})});
  Rng rng(1);
  try {
    sample_support(d, 2, 0.0, rng);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("B-x"), std::string::npos) << msg;
    EXPECT_NE(msg.find("I-y"), std::string::npos) << msg;
  }
}

TEST(SampleSupport, RejectsBadArguments) {
  const Domain d = weather_domain();
  Rng rng(0);
  EXPECT_THROW(sample_support(d, 0, 0.0, rng), ConfigError);
  EXPECT_THROW(sample_support(d, 1, 1.5, rng), ConfigError);
}

TEST(SampleSupport, SyntheticDomainK1AndK5) {
  const Domain d = synthetic_domain("syn", SyntheticSpec{}, 3);
  const auto domain_counts = oracle::count(d.sentences);
  for (int k : {1, 5}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      Rng rng(seed);
      const auto s = sample_support(d, k, 0.0, rng);
      EXPECT_TRUE(oracle::covers(s.sentences, domain_counts, k));
      EXPECT_TRUE(oracle::minimal(s.sentences, domain_counts, k));
      EXPECT_TRUE(covers_k(s.label_counts, count_labels(d.sentences), k));
      EXPECT_TRUE(is_minimal(s.sentences, count_labels(d.sentences), k));
      Rng skip(seed);
      EXPECT_TRUE(oracle::covers(sample_support(d, k, 0.5, skip).sentences, domain_counts, k));
    }
  }
}

TEST(SampleEpisode, QueriesAvoidSupport) {
  const Domain d = synthetic_domain("syn", SyntheticSpec{}, 9);
  Rng rng(5);
  const Episode ep = sample_episode(d, 1, 20, 0.2, rng, 17);
  EXPECT_EQ(ep.episode_id, 17);
  EXPECT_EQ(ep.queries.size(), 20u);
  std::set<Sentence> support(ep.support.sentences.begin(), ep.support.sentences.end());
  for (const auto& q : ep.queries) EXPECT_FALSE(support.contains(q));
  EXPECT_EQ(ep.label_set, d.label_set);
}

TEST(SampleEpisode, TooFewSentencesForQueries) {
  const Domain d = weather_domain();
  Rng rng(0);
  EXPECT_THROW(sample_episode(d, 1, 50, 0.0, rng), InfeasibleError);
}

TEST(BuildSplit, DeterministicAndConsecutiveIds) {
  const auto domains = synthetic_domains(2, SyntheticSpec{}, 4);
  SplitOptions options;
  options.episodes_per_domain = 5;
  options.seed = 12;
  const EpisodeSet a = build_split(domains, options);
  const EpisodeSet b = build_split(domains, options);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.episodes.size(), 10u);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) EXPECT_EQ(a.episodes[i].episode_id, static_cast<int>(i));
  options.seed = 13;
  EXPECT_NE(build_split(domains, options), a);
}

TEST(EpisodeFiles, JsonLinesRoundTrip) {
  const auto domains = synthetic_domains(2, SyntheticSpec{}, 4);
  SplitOptions options;
  options.episodes_per_domain = 3;
  options.n_query = 4;
  const EpisodeSet set = build_split(domains, options);
  std::stringstream buf;
  write_episodes(set, buf);
  std::size_t lines = 0;
  for (char c : buf.str()) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 6u);
  EXPECT_EQ(read_episodes(buf), set);
}

TEST(EpisodeFiles, MalformedLineIsReported) {
  std::stringstream bad("{\"episode_id\": 1}\n");
  EXPECT_THROW(read_episodes(bad), ParseError);
}

}  // namespace
}  // namespace fewshot
