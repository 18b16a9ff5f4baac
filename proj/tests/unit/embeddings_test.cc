#include <chrono>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fewshot/embeddings.h"
#include "fewshot/error.h"
#include "oracles.h"

namespace fewshot {
namespace {

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("fewshot_emb_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::vector<float> vec(int dim, float base) {
  std::vector<float> v(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = base + 0.25f * static_cast<float>(i);
  return v;
}

TEST(HashEmbed, DeterministicUnitNormCaseInsensitive) {
  const auto a = hash_embed("Paris", 32, 1);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_EQ(a, hash_embed("paris", 32, 1));
  EXPECT_NE(a, hash_embed("paris", 32, 2));
  EXPECT_LT(std::abs(a.dot(hash_embed("london", 32, 1))), 0.8);
}

TEST(LabelText, Conventions) {
  EXPECT_EQ(label_text("B-weather"), "begin weather");
  EXPECT_EQ(label_text("I-time_range"), "inner time range");
  EXPECT_EQ(label_text("O"), "O");
  EXPECT_EQ(label_text("O", "other"), "other");
}

TEST(Store, PutChecksDimension) {
  EmbeddingStore store(4);
  EXPECT_THROW(store.put(TokenKey{0, Role::kQuery, 0, 0, 0}, vec(3, 0.f)), DimensionError);
  EXPECT_THROW(EmbeddingStore(0), ConfigError);
}

TEST(Store, MissingRecordNamesTheKey) {
  EmbeddingStore store(4);
  try {
    store.token_vector(TokenKey{7, Role::kSupport, 2, 1, 3}, "x");
    FAIL() << "expected MissingRecordError";
  } catch (const MissingRecordError& e) {
    EXPECT_NE(std::string(e.what()).find(describe(TokenKey{7, Role::kSupport, 2, 1, 3})), std::string::npos);
  }
  EXPECT_THROW(store.label_vector("d", "B-x"), MissingRecordError);
}

TEST(Store, RoundTripPlainAndSidecar) {
  TempDir dir;
  EmbeddingStore store(5);
  store.put(TokenKey{1, Role::kQuery, 0, 2, 3}, vec(5, 0.5f));
  store.put(TokenKey{1, Role::kSupport, 1, -1, 0}, vec(5, -1.0f));
  store.put(LabelKey{"music", "B-artist"}, vec(5, 3.0f));
  for (bool sidecar : {false, true}) {
    const auto path = dir / (sidecar ? "s.jsonl" : "p.jsonl");
    save_store(store, path, sidecar);
    EXPECT_EQ(load_store(path), store);
  }
}

TEST(Store, WrongDimensionRecordRaisesDimensionError) {
  TempDir dir;
  std::ofstream(dir / "bad.jsonl") << "{\"dim\":3,\"kind\":\"f32\"}\n"
                                   << "{\"key\":[0,\"query\",0,0,0],\"vec\":[1,2]}\n";
  EXPECT_THROW(load_store(dir / "bad.jsonl"), DimensionError);
  std::ofstream(dir / "worse.jsonl") << "{\"dim\":3}\n{\"key\":[0,\"sideways\",0,0,0],\"vec\":[1,2,3]}\n";
  EXPECT_THROW(load_store(dir / "worse.jsonl"), ParseError);
}

TEST(Store, TenThousandRecordsLoadQuickly) {
  TempDir dir;
  EmbeddingStore store(64);
  for (int i = 0; i < 10000; ++i) store.put(TokenKey{i / 100, Role::kQuery, i % 100, 0, 0}, vec(64, 0.001f * i));
  for (bool sidecar : {false, true}) {
    const auto path = dir / (sidecar ? "big_s.jsonl" : "big.jsonl");
    save_store(store, path, sidecar);
    const auto t0 = std::chrono::steady_clock::now();
    const EmbeddingStore loaded = load_store(path);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(loaded.size(), 10000u);
    EXPECT_LT(seconds, 2.0);
  }
}

Episode tiny_episode() {
  Episode ep;
  ep.episode_id = 3;
  ep.domain_name = "d";
  ep.label_set = LabelSet({"x"});
  ep.support = make_support({{{"a", "b"}, {"B-x", "O"}}, {{"c"}, {"B-x"}}, {{"d"}, {"O"}}});
  ep.queries = {{{"e", "f"}, {"O", "B-x"}}};
  return ep;
}

TEST(PairwiseEmbedding, AveragesOverSupportPairs) {
  const Episode ep = tiny_episode();
  EmbeddingStore store(2);
  for (int pair = 0; pair < 3; ++pair) {
    for (int t = 0; t < 2; ++t) {
      store.put(TokenKey{3, Role::kQuery, 0, pair, t},
                {static_cast<float>(pair + 1), static_cast<float>(10 * t)});
    }
  }
  const Eigen::MatrixXd q = pairwise_query_embedding(ep, 0, store);
  EXPECT_DOUBLE_EQ(q(0, 0), 2.0);  // mean of 1, 2, 3
  EXPECT_DOUBLE_EQ(q(1, 1), 10.0);
  EXPECT_THROW(pairwise_query_embedding(ep, 0, store, false), MissingRecordError);
}

TEST(PairwiseEmbedding, SingleSupportSentenceIsThatPair) {
  Episode ep = tiny_episode();
  ep.support = make_support({{{"a"}, {"B-x"}}});
  EmbeddingStore store(2);
  store.put(TokenKey{3, Role::kQuery, 0, 0, 0}, {1.f, 2.f});
  store.put(TokenKey{3, Role::kQuery, 0, 0, 1}, {3.f, 4.f});
  const Eigen::MatrixXd q = pairwise_query_embedding(ep, 0, store);
  EXPECT_DOUBLE_EQ(q(1, 0), 3.0);
}

TEST(RequiredKeys, MatchWhatTheEngineReads) {
  const Episode ep = tiny_episode();
  EpisodeSet set;
  set.episodes = {ep};
  const auto keys = required_token_keys(set, true);
  // query: 2 tokens x 3 pairs; support: (2 + 1 + 1) tokens x 1 query
  EXPECT_EQ(keys.size(), 10u);
  EmbeddingStore store(3);
  for (const auto& k : keys) store.put(k, vec(3, 0.f));
  EXPECT_NO_THROW(pairwise_query_embedding(ep, 0, store));
  EXPECT_NO_THROW(support_token_embeddings(ep, 0, store));
  EXPECT_EQ(required_token_keys(set, false).size(), 6u);
}

TEST(HashEmbedder, LabelVectorsUseLabelText) {
  HashEmbedder h(16, 4);
  EXPECT_EQ(h.label_vector("any", "B-time_range"), hash_embed_text("begin time range", 16, 4));
  EXPECT_TRUE(h.context_free());
}

}  // namespace
}  // namespace fewshot
