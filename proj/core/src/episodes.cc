#include "fewshot/episodes.h"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/error.h"

namespace fewshot {
namespace {

using nlohmann::json;

json sentence_to_json(const Sentence& s) {
  return json{{"tokens", s.tokens}, {"labels", s.labels}};
}

Sentence sentence_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("tokens") || !j.contains("labels")) {
    throw ParseError(where + ": sentence needs \"tokens\" and \"labels\"");
  }
  Sentence s;
  try {
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.labels = j.at("labels").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw ParseError(where + ": tokens and labels must be string arrays");
  }
  if (s.tokens.empty() || s.tokens.size() != s.labels.size()) {
    throw ParseError(where + ": tokens and labels must be nonempty and equally long");
  }
  return s;
}

bool has_label(const Sentence& s, const std::string& label) {
  for (const auto& l : s.labels) {
    if (l == label) return true;
  }
  return false;
}

void add_counts(LabelCounts& counts, const Sentence& s, int sign) {
  for (const auto& l : s.labels) counts[l] += sign;
}

}  // namespace

LabelCounts count_labels(const std::vector<Sentence>& sentences) {
  LabelCounts counts;
  for (const auto& s : sentences) add_counts(counts, s, 1);
  return counts;
}

SupportSet make_support(std::vector<Sentence> sentences) {
  SupportSet support;
  support.label_counts = count_labels(sentences);
  support.sentences = std::move(sentences);
  return support;
}

bool covers_k(const LabelCounts& counts, const LabelCounts& domain_counts, int k) {
  for (const auto& [label, total] : domain_counts) {
    if (total <= 0) continue;
    auto it = counts.find(label);
    if (it == counts.end() || it->second < k) return false;
  }
  return true;
}

bool is_minimal(const std::vector<Sentence>& support, const LabelCounts& domain_counts, int k) {
  LabelCounts counts = count_labels(support);
  for (const auto& s : support) {
    add_counts(counts, s, -1);
    const bool still_covered = covers_k(counts, domain_counts, k);
    add_counts(counts, s, 1);
    if (still_covered) return false;
  }
  return true;
}

SupportSet sample_support(const Domain& domain, int k, double skip_prob, Rng& rng) {
  if (k < 1) throw ConfigError("K must be at least 1");
  if (!(skip_prob >= 0.0 && skip_prob <= 1.0)) throw ConfigError("skip_prob must lie in [0, 1]");

  const LabelCounts domain_counts = count_labels(domain.sentences);
  std::string deficient;
  for (const auto& label : domain.label_set.bio_labels()) {
    auto it = domain_counts.find(label);
    if (it != domain_counts.end() && it->second > 0 && it->second < k) {
      if (!deficient.empty()) deficient += ", ";
      deficient += label + " (" + std::to_string(it->second) + ")";
    }
  }
  if (!deficient.empty()) {
    throw InfeasibleError("domain " + domain.name + " cannot cover K=" + std::to_string(k) +
                          "; deficient labels: " + deficient);
  }

  const std::size_t n = domain.sentences.size();
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> order;
  LabelCounts counts;

  for (const auto& label : domain.label_set.bio_labels()) {
    auto total = domain_counts.find(label);
    if (total == domain_counts.end() || total->second == 0) continue;
    while (counts[label] < k) {
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && has_label(domain.sentences[i], label)) candidates.push_back(i);
      }
      if (candidates.empty()) {
        throw InfeasibleError("domain " + domain.name + ": ran out of sentences for " + label);
      }
      const std::size_t pick = candidates[uniform_index(rng, candidates.size())];
      taken[pick] = true;
      order.push_back(pick);
      add_counts(counts, domain.sentences[pick], 1);
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    if (skip_prob > 0.0 && uniform_unit(rng) < skip_prob) {
      kept.push_back(idx);
      continue;
    }
    add_counts(counts, domain.sentences[idx], -1);
    if (!covers_k(counts, domain_counts, k)) {
      add_counts(counts, domain.sentences[idx], 1);
      kept.push_back(idx);
    }
  }

  std::vector<Sentence> sentences;
  sentences.reserve(kept.size());
  for (std::size_t idx : kept) sentences.push_back(domain.sentences[idx]);
  return make_support(std::move(sentences));
}

Episode sample_episode(const Domain& domain, int k, int n_query, double skip_prob, Rng& rng,
                       std::int64_t episode_id) {
  if (n_query < 0) throw ConfigError("query count must be non-negative");
  Episode episode;
  episode.episode_id = episode_id;
  episode.domain_name = domain.name;
  episode.label_set = domain.label_set;
  episode.support = sample_support(domain, k, skip_prob, rng);

  const std::set<Sentence> in_support(episode.support.sentences.begin(),
                                      episode.support.sentences.end());
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < domain.sentences.size(); ++i) {
    if (!in_support.contains(domain.sentences[i])) pool.push_back(i);
  }
  if (pool.size() < static_cast<std::size_t>(n_query)) {
    throw InfeasibleError("domain " + domain.name + " has only " + std::to_string(pool.size()) +
                          " sentences outside the support set; " + std::to_string(n_query) +
                          " queries requested");
  }
  // Partial Fisher-Yates.
  for (int q = 0; q < n_query; ++q) {
    const std::size_t j = static_cast<std::size_t>(q) + uniform_index(rng, pool.size() - q);
    std::swap(pool[static_cast<std::size_t>(q)], pool[j]);
    episode.queries.push_back(domain.sentences[pool[static_cast<std::size_t>(q)]]);
  }
  return episode;
}

EpisodeSet build_split(const std::vector<Domain>& domains, const SplitOptions& options) {
  if (options.episodes_per_domain < 0) throw ConfigError("episodes_per_domain must be >= 0");
  EpisodeSet set;
  set.k = options.k;
  set.queries_per_episode = options.n_query;
  set.rng_seed = options.seed;
  std::int64_t next_id = 0;
  for (std::size_t d = 0; d < domains.size(); ++d) {
    for (int e = 0; e < options.episodes_per_domain; ++e) {
      Rng rng(derive_seed(options.seed, d, static_cast<std::uint64_t>(e)));
      try {
        set.episodes.push_back(sample_episode(domains[d], options.k, options.n_query,
                                              options.skip_prob, rng, next_id++));
      } catch (const InfeasibleError& err) {
        throw InfeasibleError("domain " + domains[d].name + ": " + err.what());
      }
    }
  }
  return set;
}

void write_episodes(const EpisodeSet& set, std::ostream& out) {
  for (const auto& episode : set.episodes) {
    json line;
    line["episode_id"] = episode.episode_id;
    line["domain"] = episode.domain_name;
    line["label_set"] = episode.label_set.bio_labels();
    line["k"] = set.k;
    line["n_query"] = set.queries_per_episode;
    line["seed"] = set.rng_seed;
    line["support"] = json::array();
    for (const auto& s : episode.support.sentences) line["support"].push_back(sentence_to_json(s));
    line["queries"] = json::array();
    for (const auto& s : episode.queries) line["queries"].push_back(sentence_to_json(s));
    out << line.dump() << '\n';
  }
}

void write_episodes(const EpisodeSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_episodes(set, out);
}

EpisodeSet read_episodes(std::istream& in) {
  EpisodeSet set;
  std::string text;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "episode line " + std::to_string(line_no);
    json line;
    try {
      line = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      Episode episode;
      episode.episode_id = line.at("episode_id").get<std::int64_t>();
      episode.domain_name = line.at("domain").get<std::string>();
      episode.label_set =
          LabelSet::from_bio_labels(line.at("label_set").get<std::vector<std::string>>());
      std::vector<Sentence> support;
      for (const auto& s : line.at("support")) support.push_back(sentence_from_json(s, where));
      episode.support = make_support(std::move(support));
      for (const auto& s : line.at("queries")) episode.queries.push_back(sentence_from_json(s, where));
      for (const auto* group : {&episode.support.sentences, &episode.queries}) {
        for (const auto& s : *group) {
          for (const auto& l : s.labels) {
            if (!episode.label_set.contains(l)) {
              throw ParseError(where + ": label \"" + l + "\" not in the episode label set");
            }
          }
        }
      }
      if (first) {
        set.k = line.value("k", 1);
        set.queries_per_episode = line.value("n_query", static_cast<int>(episode.queries.size()));
        set.rng_seed = line.value("seed", std::uint64_t{0});
        first = false;
      }
      set.episodes.push_back(std::move(episode));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return set;
}

EpisodeSet read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_episodes(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace fewshot
