#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "fewshot/episodes.h"

namespace fewshot {

enum class Role { kQuery, kSupport };

std::string_view role_name(Role role);

// Identifies one word-level vector produced by encoding a (query, support)
// sentence pair. For a query record, pair_index is the support sentence it
// was paired with; for a support record it is the query index. pair_index
// -1 marks a sentence encoded on its own.
struct TokenKey {
  std::int64_t episode_id = 0;
  Role role = Role::kQuery;
  int sentence_index = 0;
  int pair_index = 0;
  int token_index = 0;

  friend auto operator<=>(const TokenKey&, const TokenKey&) = default;
};

std::string describe(const TokenKey& key);

struct LabelKey {
  std::string domain;
  std::string label;

  friend auto operator<=>(const LabelKey&, const LabelKey&) = default;
};

// Anything that can hand out token and label-name vectors.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;

  virtual int dim() const = 0;
  // Context-free sources return the same vector for a token regardless of
  // the sentence pair it was encoded in.
  virtual bool context_free() const = 0;
  virtual Eigen::VectorXd token_vector(const TokenKey& key, const std::string& token) const = 0;
  virtual Eigen::VectorXd label_vector(const std::string& domain,
                                       const std::string& bio_label) const = 0;
};

// Deterministic unit-norm pseudo-embedding of the lowercased token; the
// generator is seeded from a 64-bit FNV-1a hash of the token and `seed`.
Eigen::VectorXd hash_embed(std::string_view token, int dim, std::uint64_t seed);

// Text used to embed a label name: "begin <slot>", "inner <slot>" or
// `o_text`. Underscores in slot names become spaces.
std::string label_text(const std::string& bio_label, const std::string& o_text = "O");

// Normalized mean of the hash embeddings of the whitespace-separated words.
Eigen::VectorXd hash_embed_text(std::string_view text, int dim, std::uint64_t seed);

class HashEmbedder final : public EmbeddingSource {
 public:
  explicit HashEmbedder(int dim, std::uint64_t seed = 0, std::string o_text = "O");

  int dim() const override { return dim_; }
  bool context_free() const override { return true; }
  Eigen::VectorXd token_vector(const TokenKey& key, const std::string& token) const override;
  Eigen::VectorXd label_vector(const std::string& domain,
                               const std::string& bio_label) const override;

 private:
  int dim_;
  std::uint64_t seed_;
  std::string o_text_;
};

// File-backed vectors keyed by TokenKey / LabelKey. Immutable once built.
class EmbeddingStore final : public EmbeddingSource {
 public:
  explicit EmbeddingStore(int dim);

  int dim() const override { return dim_; }
  bool context_free() const override { return false; }
  Eigen::VectorXd token_vector(const TokenKey& key, const std::string& token) const override;
  Eigen::VectorXd label_vector(const std::string& domain,
                               const std::string& bio_label) const override;

  void put(const TokenKey& key, std::vector<float> vec);
  void put(const LabelKey& key, std::vector<float> vec);
  bool contains(const TokenKey& key) const { return tokens_.contains(key); }
  bool contains(const LabelKey& key) const { return labels_.contains(key); }

  const std::map<TokenKey, std::vector<float>>& token_records() const { return tokens_; }
  const std::map<LabelKey, std::vector<float>>& label_records() const { return labels_; }
  std::size_t size() const { return tokens_.size() + labels_.size(); }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.tokens_ == b.tokens_ && a.labels_ == b.labels_;
  }

 private:
  void check(const std::vector<float>& vec) const;

  int dim_;
  std::map<TokenKey, std::vector<float>> tokens_;
  std::map<LabelKey, std::vector<float>> labels_;
};

// Header line {"dim": D, "kind": "f32"} followed by one JSON record per line.
// With `sidecar`, vectors go to a little-endian f32 blob next to the store
// and the header carries the blob name, keys and byte offsets.
void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                bool sidecar = false);
EmbeddingStore load_store(const std::filesystem::path& path);

// n x D matrix; each query token is the mean of its N_S pair-conditioned
// vectors. With pairwise = false the solo (pair_index -1) encoding is used.
Eigen::MatrixXd pairwise_query_embedding(const Episode& episode, int query_index,
                                         const EmbeddingSource& source, bool pairwise = true);

// One matrix per support sentence, taken from the (query, support_i) pair.
std::vector<Eigen::MatrixXd> support_token_embeddings(const Episode& episode, int query_index,
                                                      const EmbeddingSource& source,
                                                      bool pairwise = true);

Eigen::VectorXd label_semantic_embedding(const std::string& bio_label, const std::string& domain,
                                         const EmbeddingSource& source);

// Every key the engine will request for an episode file. Used to validate a
// store before a long run.
std::vector<TokenKey> required_token_keys(const EpisodeSet& set, bool pairwise = true);

}  // namespace fewshot
