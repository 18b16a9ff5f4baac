#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fewshot {

// A labeled chunk with inclusive token bounds.
struct Span {
  std::string slot;
  int start = 0;
  int end = 0;

  friend auto operator<=>(const Span&, const Span&) = default;
};

// conlleval chunking: a span opens at B-x, or at I-x whose predecessor is
// not B-x/I-x, and closes before O, a B, or a change of type.
std::vector<Span> extract_spans(const std::vector<std::string>& labels);

// Strict reading: I-x without a preceding B-x/I-x opens nothing.
std::vector<Span> extract_spans_strict(const std::vector<std::string>& labels);

// Writes spans back as canonical BIO over n tokens.
std::vector<std::string> spans_to_bio(const std::vector<Span>& spans, std::size_t n);

struct Prf {
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  int correct = 0;
  int predicted = 0;
  int gold = 0;
};

// Micro-averaged span P/R/F1 (percent) over the queries of one episode.
// No gold and no predicted spans scores 100; otherwise an empty side gives 0.
Prf episode_f1(const std::vector<std::vector<std::string>>& predictions,
               const std::vector<std::vector<std::string>>& golds, bool strict = false);

struct EvalReport {
  std::vector<std::vector<double>> episode_f1;  // [seed][episode]
  std::vector<double> seed_means;
  double mean = 0.0;
  double std = 0.0;  // population std over seed means
};

// Mean over episodes per seed, then mean and population std over seeds.
EvalReport aggregate(const std::vector<std::vector<double>>& per_seed_episode_f1);

enum class BigramType { kOO, kOB, kBO, kIO, kXB, kBI, kII, kOther };
inline constexpr std::size_t kBigramTypes = 8;

std::string_view bigram_name(BigramType t);

struct BigramRow {
  long total = 0;
  long correct = 0;
  double accuracy = 0.0;    // percent
  double proportion = 0.0;  // percent of all bigrams
};

// Rows indexed by BigramType. kXB merges I-B and B-B; kOther collects
// bigrams outside the usual categories (O-I in lenient data).
struct BigramTable {
  std::array<BigramRow, kBigramTypes> rows{};
  long total = 0;
};

BigramType classify_bigram(std::string_view prev, std::string_view next);

// A bigram is correct when both predicted labels equal the gold ones.
BigramTable bigram_accuracy(const std::vector<std::vector<std::string>>& predictions,
                            const std::vector<std::vector<std::string>>& golds);

// Aligned-column text rendering of a report and of a bigram table.
void print_report(std::ostream& out, const EvalReport& report,
                  const std::vector<std::string>& seed_names);
void print_bigrams(std::ostream& out, const BigramTable& table);

}  // namespace fewshot
