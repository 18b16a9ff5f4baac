#include "fewshot/embeddings.h"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/error.h"
#include "fewshot/rng.h"

namespace fewshot {
namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<float>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

json key_to_json(const TokenKey& k) {
  return json::array({k.episode_id, std::string(role_name(k.role)), k.sentence_index,
                      k.pair_index, k.token_index});
}

json key_to_json(const LabelKey& k) { return json::array({k.domain, k.label}); }

// Returns true for a token key, false for a label key.
bool key_from_json(const json& j, TokenKey& token, LabelKey& label) {
  if (!j.is_array()) throw ParseError("record key must be an array");
  if (j.size() == 5) {
    token.episode_id = j[0].get<std::int64_t>();
    const auto role = j[1].get<std::string>();
    if (role == "query") {
      token.role = Role::kQuery;
    } else if (role == "support") {
      token.role = Role::kSupport;
    } else {
      throw ParseError("unknown role \"" + role + "\"");
    }
    token.sentence_index = j[2].get<int>();
    token.pair_index = j[3].get<int>();
    token.token_index = j[4].get<int>();
    return true;
  }
  if (j.size() == 2) {
    label.domain = j[0].get<std::string>();
    label.label = j[1].get<std::string>();
    return false;
  }
  throw ParseError("record key must have 5 (token) or 2 (label) elements");
}

void append_le(std::string& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

float read_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::string_view role_name(Role role) { return role == Role::kQuery ? "query" : "support"; }

std::string describe(const TokenKey& key) {
  return "(episode " + std::to_string(key.episode_id) + ", " + std::string(role_name(key.role)) +
         ", sentence " + std::to_string(key.sentence_index) + ", pair " +
         std::to_string(key.pair_index) + ", token " + std::to_string(key.token_index) + ")";
}

Eigen::VectorXd hash_embed(std::string_view token, int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  Rng rng(mix64(fnv1a64(lowercase(token)) ^ mix64(seed)));
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = standard_normal(rng);
  const double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
}

std::string label_text(const std::string& bio_label, const std::string& o_text) {
  auto tag = parse_bio(bio_label);
  if (!tag) throw Error("invalid label \"" + bio_label + "\"");
  if (tag->kind == Bio::kO) return o_text;
  std::string slot = tag->slot;
  for (auto& c : slot) {
    if (c == '_') c = ' ';
  }
  return (tag->kind == Bio::kB ? "begin " : "inner ") + slot;
}

Eigen::VectorXd hash_embed_text(std::string_view text, int dim, std::uint64_t seed) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) sum += hash_embed(word, dim, seed);
  const double norm = sum.norm();
  if (norm == 0.0) return hash_embed(text, dim, seed);
  return sum / norm;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed, std::string o_text)
    : dim_(dim), seed_(seed), o_text_(std::move(o_text)) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
}

Eigen::VectorXd HashEmbedder::token_vector(const TokenKey&, const std::string& token) const {
  return hash_embed(token, dim_, seed_);
}

Eigen::VectorXd HashEmbedder::label_vector(const std::string&, const std::string& bio_label) const {
  return hash_embed_text(label_text(bio_label, o_text_), dim_, seed_);
}

EmbeddingStore::EmbeddingStore(int dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
}

void EmbeddingStore::check(const std::vector<float>& vec) const {
  if (static_cast<int>(vec.size()) != dim_) {
    throw DimensionError("vector of length " + std::to_string(vec.size()) +
                         " in a store of dimension " + std::to_string(dim_));
  }
  for (float f : vec) {
    if (!std::isfinite(f)) throw ParseError("non-finite value in embedding vector");
  }
}

void EmbeddingStore::put(const TokenKey& key, std::vector<float> vec) {
  check(vec);
  tokens_[key] = std::move(vec);
}

void EmbeddingStore::put(const LabelKey& key, std::vector<float> vec) {
  check(vec);
  labels_[key] = std::move(vec);
}

Eigen::VectorXd EmbeddingStore::token_vector(const TokenKey& key, const std::string&) const {
  auto it = tokens_.find(key);
  if (it == tokens_.end()) throw MissingRecordError("missing token record " + describe(key));
  return to_vector(it->second);
}

Eigen::VectorXd EmbeddingStore::label_vector(const std::string& domain,
                                             const std::string& bio_label) const {
  auto it = labels_.find(LabelKey{domain, bio_label});
  if (it == labels_.end()) {
    throw MissingRecordError("missing label record (" + domain + ", " + bio_label + ")");
  }
  return to_vector(it->second);
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path, bool sidecar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  json header{{"dim", store.dim()}, {"kind", "f32"}};
  auto vec_json = [](const std::vector<float>& v) {
    json arr = json::array();
    for (float f : v) arr.push_back(static_cast<double>(f));
    return arr;
  };
  if (!sidecar) {
    out << header.dump() << '\n';
    for (const auto& [key, vec] : store.token_records()) {
      out << json{{"key", key_to_json(key)}, {"vec", vec_json(vec)}}.dump() << '\n';
    }
    for (const auto& [key, vec] : store.label_records()) {
      out << json{{"key", key_to_json(key)}, {"vec", vec_json(vec)}}.dump() << '\n';
    }
    return;
  }
  std::filesystem::path blob_path = path;
  blob_path += ".f32";
  std::string blob;
  json keys = json::array();
  json offsets = json::array();
  auto append = [&](const json& key, const std::vector<float>& vec) {
    keys.push_back(key);
    offsets.push_back(blob.size());
    for (float f : vec) append_le(blob, f);
  };
  for (const auto& [key, vec] : store.token_records()) append(key_to_json(key), vec);
  for (const auto& [key, vec] : store.label_records()) append(key_to_json(key), vec);
  header["blob"] = blob_path.filename().string();
  header["keys"] = std::move(keys);
  header["offsets"] = std::move(offsets);
  out << header.dump() << '\n';
  std::ofstream blob_out(blob_path, std::ios::binary);
  if (!blob_out) throw Error("cannot write " + blob_path.string());
  blob_out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty store file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": bad header: " + e.what());
  }
  if (!header.contains("dim") || !header["dim"].is_number_integer()) {
    throw ParseError(path.string() + ": header needs an integer \"dim\"");
  }
  if (header.value("kind", std::string("f32")) != "f32") {
    throw ParseError(path.string() + ": only kind \"f32\" is supported");
  }
  const int dim = header["dim"].get<int>();
  EmbeddingStore store(dim);

  auto insert = [&](const json& key, std::vector<float> vec) {
    TokenKey tk;
    LabelKey lk;
    if (key_from_json(key, tk, lk)) {
      store.put(tk, std::move(vec));
    } else {
      store.put(lk, std::move(vec));
    }
  };

  if (header.contains("blob")) {
    const auto blob_path = path.parent_path() / header["blob"].get<std::string>();
    std::ifstream blob_in(blob_path, std::ios::binary);
    if (!blob_in) throw Error("cannot open " + blob_path.string());
    std::string blob((std::istreambuf_iterator<char>(blob_in)), std::istreambuf_iterator<char>());
    const auto& keys = header.at("keys");
    const auto& offsets = header.at("offsets");
    if (keys.size() != offsets.size()) throw ParseError("store header: keys/offsets mismatch");
    const std::size_t bytes = static_cast<std::size_t>(dim) * 4;
    for (std::size_t r = 0; r < keys.size(); ++r) {
      const auto offset = offsets[r].get<std::size_t>();
      if (offset + bytes > blob.size()) throw ParseError("store blob truncated");
      std::vector<float> vec(static_cast<std::size_t>(dim));
      const auto* base = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
      for (int i = 0; i < dim; ++i) vec[static_cast<std::size_t>(i)] = read_le(base + 4 * i);
      insert(keys[r], std::move(vec));
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      const auto& vec_json = record.at("vec");
      std::vector<float> vec;
      vec.reserve(vec_json.size());
      for (const auto& x : vec_json) vec.push_back(static_cast<float>(x.get<double>()));
      insert(record.at("key"), std::move(vec));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

Eigen::MatrixXd pairwise_query_embedding(const Episode& episode, int query_index,
                                         const EmbeddingSource& source, bool pairwise) {
  const Sentence& query = episode.queries.at(static_cast<std::size_t>(query_index));
  const int n = static_cast<int>(query.size());
  const int n_support = static_cast<int>(episode.support.sentences.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, source.dim());
  TokenKey key{episode.episode_id, Role::kQuery, query_index, -1, 0};
  if (source.context_free() || !pairwise) {
    for (int t = 0; t < n; ++t) {
      key.token_index = t;
      out.row(t) = source.token_vector(key, query.tokens[static_cast<std::size_t>(t)]);
    }
    return out;
  }
  if (n_support == 0) throw Error("pair-wise embedding needs a nonempty support set");
  for (int pair = 0; pair < n_support; ++pair) {
    key.pair_index = pair;
    for (int t = 0; t < n; ++t) {
      key.token_index = t;
      out.row(t) += source.token_vector(key, query.tokens[static_cast<std::size_t>(t)]);
    }
  }
  out /= static_cast<double>(n_support);
  return out;
}

std::vector<Eigen::MatrixXd> support_token_embeddings(const Episode& episode, int query_index,
                                                      const EmbeddingSource& source,
                                                      bool pairwise) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(episode.support.sentences.size());
  const bool solo = source.context_free() || !pairwise;
  for (std::size_t i = 0; i < episode.support.sentences.size(); ++i) {
    const Sentence& s = episode.support.sentences[i];
    const int n = static_cast<int>(s.size());
    Eigen::MatrixXd m(n, source.dim());
    TokenKey key{episode.episode_id, Role::kSupport, static_cast<int>(i),
                 solo ? -1 : query_index, 0};
    for (int t = 0; t < n; ++t) {
      key.token_index = t;
      m.row(t) = source.token_vector(key, s.tokens[static_cast<std::size_t>(t)]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::VectorXd label_semantic_embedding(const std::string& bio_label, const std::string& domain,
                                         const EmbeddingSource& source) {
  return source.label_vector(domain, bio_label);
}

std::vector<TokenKey> required_token_keys(const EpisodeSet& set, bool pairwise) {
  std::vector<TokenKey> keys;
  for (const auto& ep : set.episodes) {
    const int n_support = static_cast<int>(ep.support.sentences.size());
    const int n_query = static_cast<int>(ep.queries.size());
    for (int q = 0; q < n_query; ++q) {
      const int n = static_cast<int>(ep.queries[static_cast<std::size_t>(q)].size());
      const int pairs = pairwise ? n_support : 1;
      for (int p = 0; p < pairs; ++p) {
        for (int t = 0; t < n; ++t) {
          keys.push_back({ep.episode_id, Role::kQuery, q, pairwise ? p : -1, t});
        }
      }
    }
    for (int i = 0; i < n_support; ++i) {
      const int n = static_cast<int>(ep.support.sentences[static_cast<std::size_t>(i)].size());
      const int pairs = pairwise ? n_query : 1;
      for (int p = 0; p < pairs; ++p) {
        for (int t = 0; t < n; ++t) {
          keys.push_back({ep.episode_id, Role::kSupport, i, pairwise ? p : -1, t});
        }
      }
    }
  }
  return keys;
}

}  // namespace fewshot
