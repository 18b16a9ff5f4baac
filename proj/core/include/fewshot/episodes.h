#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fewshot/corpus.h"
#include "fewshot/rng.h"

namespace fewshot {

// Occurrence count of every BIO label over a set of sentences.
using LabelCounts = std::map<std::string, int>;

LabelCounts count_labels(const std::vector<Sentence>& sentences);

struct SupportSet {
  std::vector<Sentence> sentences;
  LabelCounts label_counts;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;
};

SupportSet make_support(std::vector<Sentence> sentences);

struct Episode {
  std::int64_t episode_id = 0;
  std::string domain_name;
  LabelSet label_set;
  SupportSet support;
  std::vector<Sentence> queries;

  friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodeSet {
  std::vector<Episode> episodes;
  int k = 1;
  int queries_per_episode = 20;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const EpisodeSet&, const EpisodeSet&) = default;
};

// Minimum-including support sampling with BIO-level coverage counting:
//  1. every BIO label occurring in the domain occurs at least k times;
//  2. (skip_prob == 0) removing any single sentence breaks property 1.
// The shrink pass walks sentences in insertion order and skips each removal
// attempt with probability skip_prob. Labels absent from the domain are
// exempt. Throws InfeasibleError naming every label with 0 < count < k.
SupportSet sample_support(const Domain& domain, int k, double skip_prob, Rng& rng);

// Support plus n_query queries drawn uniformly without replacement from the
// sentences that are not (by value) in the support set.
Episode sample_episode(const Domain& domain, int k, int n_query, double skip_prob,
                       Rng& rng, std::int64_t episode_id = 0);

struct SplitOptions {
  int episodes_per_domain = 100;
  int k = 1;
  int n_query = 20;
  double skip_prob = 0.2;
  std::uint64_t seed = 0;
};

// Repeats sample_episode per domain with sub-seeds derived from
// (seed, domain index, episode index); episode ids are consecutive.
EpisodeSet build_split(const std::vector<Domain>& domains, const SplitOptions& options);

// Checks used by tests, the acceptance suite and the sample command.
bool covers_k(const LabelCounts& counts, const LabelCounts& domain_counts, int k);
bool is_minimal(const std::vector<Sentence>& support, const LabelCounts& domain_counts, int k);

// JSON-lines episode files, one episode per line.
void write_episodes(const EpisodeSet& set, std::ostream& out);
void write_episodes(const EpisodeSet& set, const std::filesystem::path& path);
EpisodeSet read_episodes(std::istream& in);
EpisodeSet read_episodes(const std::filesystem::path& path);

}  // namespace fewshot
