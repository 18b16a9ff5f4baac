#include "fewshot/evaluation.h"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "fewshot/corpus.h"
#include "fewshot/error.h"

namespace fewshot {

std::vector<Span> extract_spans(const std::vector<std::string>& labels) {
  std::vector<Span> spans;
  std::optional<Span> open;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto tag = parse_bio(labels[i]);
    if (!tag) throw Error("invalid label \"" + labels[i] + "\"");
    const int pos = static_cast<int>(i);
    if (tag->kind == Bio::kO) {
      if (open) spans.push_back(*open);
      open.reset();
      continue;
    }
    const bool continues = tag->kind == Bio::kI && open && open->slot == tag->slot;
    if (continues) {
      open->end = pos;
      continue;
    }
    if (open) spans.push_back(*open);
    open = Span{tag->slot, pos, pos};
  }
  if (open) spans.push_back(*open);
  return spans;
}

std::vector<Span> extract_spans_strict(const std::vector<std::string>& labels) {
  std::vector<Span> spans;
  std::optional<Span> open;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto tag = parse_bio(labels[i]);
    if (!tag) throw Error("invalid label \"" + labels[i] + "\"");
    const int pos = static_cast<int>(i);
    if (tag->kind == Bio::kI && open && open->slot == tag->slot) {
      open->end = pos;
      continue;
    }
    if (open) spans.push_back(*open);
    open.reset();
    if (tag->kind == Bio::kB) open = Span{tag->slot, pos, pos};
  }
  if (open) spans.push_back(*open);
  return spans;
}

std::vector<std::string> spans_to_bio(const std::vector<Span>& spans, std::size_t n) {
  std::vector<std::string> labels(n, "O");
  for (const auto& s : spans) {
    labels.at(static_cast<std::size_t>(s.start)) = "B-" + s.slot;
    for (int i = s.start + 1; i <= s.end; ++i) labels.at(static_cast<std::size_t>(i)) = "I-" + s.slot;
  }
  return labels;
}

Prf episode_f1(const std::vector<std::vector<std::string>>& predictions,
               const std::vector<std::vector<std::string>>& golds, bool strict) {
  if (predictions.size() != golds.size()) {
    throw DimensionError("episode has " + std::to_string(golds.size()) + " gold sequences but " +
                         std::to_string(predictions.size()) + " predictions");
  }
  Prf out;
  for (std::size_t s = 0; s < golds.size(); ++s) {
    if (predictions[s].size() != golds[s].size()) {
      throw DimensionError("sentence " + std::to_string(s) + ": prediction length " +
                           std::to_string(predictions[s].size()) + " vs gold length " +
                           std::to_string(golds[s].size()));
    }
    const auto pred = strict ? extract_spans_strict(predictions[s]) : extract_spans(predictions[s]);
    const auto gold = strict ? extract_spans_strict(golds[s]) : extract_spans(golds[s]);
    const std::set<Span> gold_set(gold.begin(), gold.end());
    for (const auto& span : pred) out.correct += gold_set.contains(span) ? 1 : 0;
    out.predicted += static_cast<int>(pred.size());
    out.gold += static_cast<int>(gold.size());
  }
  if (out.gold == 0 && out.predicted == 0) {
    out.precision = out.recall = out.f1 = 100.0;
    return out;
  }
  out.precision = out.predicted > 0 ? 100.0 * out.correct / out.predicted : 0.0;
  out.recall = out.gold > 0 ? 100.0 * out.correct / out.gold : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

EvalReport aggregate(const std::vector<std::vector<double>>& per_seed_episode_f1) {
  if (per_seed_episode_f1.empty()) throw Error("nothing to aggregate");
  EvalReport report;
  report.episode_f1 = per_seed_episode_f1;
  for (const auto& episodes : per_seed_episode_f1) {
    if (episodes.empty()) throw Error("a seed has no episodes");
    double sum = 0.0;
    for (double f : episodes) sum += f;
    report.seed_means.push_back(sum / static_cast<double>(episodes.size()));
  }
  double sum = 0.0;
  for (double m : report.seed_means) sum += m;
  report.mean = sum / static_cast<double>(report.seed_means.size());
  double var = 0.0;
  for (double m : report.seed_means) var += (m - report.mean) * (m - report.mean);
  report.std = std::sqrt(var / static_cast<double>(report.seed_means.size()));
  return report;
}

std::string_view bigram_name(BigramType t) {
  switch (t) {
    case BigramType::kOO:
      return "O-O";
    case BigramType::kOB:
      return "O-B";
    case BigramType::kBO:
      return "B-O";
    case BigramType::kIO:
      return "I-O";
    case BigramType::kXB:
      return "I-B/B-B";
    case BigramType::kBI:
      return "B-I";
    case BigramType::kII:
      return "I-I";
    case BigramType::kOther:
      return "other";
  }
  return "other";
}

BigramType classify_bigram(std::string_view prev, std::string_view next) {
  auto a = parse_bio(prev);
  auto b = parse_bio(next);
  if (!a || !b) throw Error("invalid label in bigram");
  using enum Bio;
  if (a->kind == kO && b->kind == kO) return BigramType::kOO;
  if (a->kind == kO && b->kind == kB) return BigramType::kOB;
  if (a->kind == kB && b->kind == kO) return BigramType::kBO;
  if (a->kind == kI && b->kind == kO) return BigramType::kIO;
  if (a->kind != kO && b->kind == kB) return BigramType::kXB;
  if (a->kind == kB && b->kind == kI) return BigramType::kBI;
  if (a->kind == kI && b->kind == kI) return BigramType::kII;
  return BigramType::kOther;
}

BigramTable bigram_accuracy(const std::vector<std::vector<std::string>>& predictions,
                            const std::vector<std::vector<std::string>>& golds) {
  if (predictions.size() != golds.size()) throw DimensionError("prediction/gold count mismatch");
  BigramTable table;
  for (std::size_t s = 0; s < golds.size(); ++s) {
    const auto& gold = golds[s];
    const auto& pred = predictions[s];
    if (gold.size() != pred.size()) throw DimensionError("prediction/gold length mismatch");
    for (std::size_t i = 1; i < gold.size(); ++i) {
      auto& row = table.rows[static_cast<std::size_t>(classify_bigram(gold[i - 1], gold[i]))];
      ++row.total;
      ++table.total;
      if (pred[i - 1] == gold[i - 1] && pred[i] == gold[i]) ++row.correct;
    }
  }
  for (auto& row : table.rows) {
    row.accuracy = row.total > 0 ? 100.0 * static_cast<double>(row.correct) / row.total : 0.0;
    row.proportion = table.total > 0 ? 100.0 * static_cast<double>(row.total) / table.total : 0.0;
  }
  return table;
}

void print_report(std::ostream& out, const EvalReport& report,
                  const std::vector<std::string>& seed_names) {
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %10s %10s\n", "seed", "episodes", "mean F1");
  out << line;
  for (std::size_t s = 0; s < report.seed_means.size(); ++s) {
    const std::string name = s < seed_names.size() ? seed_names[s] : std::to_string(s);
    std::snprintf(line, sizeof line, "%-12s %10zu %10.2f\n", name.c_str(),
                  report.episode_f1[s].size(), report.seed_means[s]);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-12s %10s %10.2f\n%-12s %10s %10.2f\n", "mean", "",
                report.mean, "std", "", report.std);
  out << line;
}

void print_bigrams(std::ostream& out, const BigramTable& table) {
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %10s %12s %10s\n", "bigram", "count", "proportion",
                "accuracy");
  out << line;
  for (std::size_t t = 0; t < kBigramTypes; ++t) {
    const auto& row = table.rows[t];
    const std::string name(bigram_name(static_cast<BigramType>(t)));
    std::snprintf(line, sizeof line, "%-10s %10ld %11.1f%% %9.1f%%\n", name.c_str(), row.total,
                  row.proportion, row.accuracy);
    out << line;
  }
}

}  // namespace fewshot
