#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls the library routine it is meant to check.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fewshot/corpus.h"
#include "fewshot/embeddings.h"
#include "fewshot/episodes.h"

namespace oracle {

// Every label sequence of length n over L labels, in lexicographic order.
std::vector<std::vector<int>> all_sequences(int n, int num_labels);

// Sum of transition and scaled emission terms, START/END included, written
// directly from the definition.
double path_score(const Eigen::MatrixXd& emission, const Eigen::MatrixXd& transition, double lambda,
                  const std::vector<int>& labels);

struct Exhaustive {
  double log_z = 0.0;
  double best_score = 0.0;
  std::vector<int> best;  // lexicographically smallest among ties
  Eigen::MatrixXd node;   // n x L marginals
};

Exhaustive exhaustive_crf(const Eigen::MatrixXd& emission, const Eigen::MatrixXd& transition,
                          double lambda);

// Names the collapsed cell ("O->sB", "B->dI", ...) that governs the move
// from state `prev` to state `next`, working on the label strings alone.
// States are label names plus "<START>" / "<END>". Returns "" when the move
// is structurally impossible.
std::string classify_cell(const std::string& prev, const std::string& next);

std::vector<std::string> state_names(const fewshot::LabelSet& labels);

// Label occurrence counts over sentences, from raw strings.
std::map<std::string, int> count(const std::vector<fewshot::Sentence>& sentences);

// Criterion 1: each label seen in the domain occurs at least k times.
bool covers(const std::vector<fewshot::Sentence>& support, const std::map<std::string, int>& domain_counts,
            int k);

// Criterion 2: dropping any one sentence breaks criterion 1.
bool minimal(const std::vector<fewshot::Sentence>& support, const std::map<std::string, int>& domain_counts,
             int k);

// One row of the golden conlleval fixture: gold and predicted tag columns.
struct FixtureSentence {
  std::vector<std::string> gold;
  std::vector<std::string> pred;
};

struct FixtureExpectation {
  std::string group;
  int first = 0;
  int last = 0;
  std::string precision;  // as printed, two decimals
  std::string recall;
  std::string f1;
};

std::vector<FixtureSentence> read_fixture(const std::filesystem::path& path);
std::vector<FixtureExpectation> read_expectations(const std::filesystem::path& path);

// Two-decimal rendering matching the reference script's "%6.2f" minus padding.
std::string two_decimals(double x);

// Random log-probability-like emission and transition tables with a
// sprinkling of forbidden cells (-1e30) in the transition matrix.
struct RandomCrf {
  Eigen::MatrixXd emission;
  Eigen::MatrixXd transition;
  double lambda = 1.0;
};
RandomCrf random_crf(int n, int num_labels, std::uint64_t seed, bool forbid_some = true);

// Synthetic episodes for the training tests.
fewshot::EpisodeSet synthetic_episodes(int domains, int episodes_per_domain, int k, int queries,
                                       std::uint64_t seed);

// Context-dependent store for an episode set: every record is the hash
// vector of its token plus key-specific noise, so each (query, support) pair
// sees slightly different vectors. Label records use the hash label text.
fewshot::EmbeddingStore noisy_store(const fewshot::EpisodeSet& set, int dim, std::uint64_t seed,
                                    double noise = 0.1);

}  // namespace oracle
