#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fewshot {

// Abstract part of a BIO tag.
enum class Bio { kO, kB, kI };

struct BioTag {
  Bio kind = Bio::kO;
  std::string slot;  // empty for O
};

// Parses "O", "B-<slot>" or "I-<slot>"; nullopt for anything else.
std::optional<BioTag> parse_bio(std::string_view label);
std::string format_bio(const BioTag& tag);

// A pre-tokenized utterance with one BIO label per token.
struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
  friend auto operator<=>(const Sentence&, const Sentence&) = default;
};

// Per-domain label inventory. Slots are kept in lexicographic order and the
// BIO labels are laid out as [O, B-s1, I-s1, B-s2, I-s2, ...], so id 0 is
// always O and ids are reproducible across runs.
class LabelSet {
 public:
  LabelSet() : LabelSet(std::vector<std::string>{}) {}
  explicit LabelSet(std::vector<std::string> slots);

  // Rebuilds a label set from its BIO label list; throws ParseError if the
  // list is not in canonical order.
  static LabelSet from_bio_labels(const std::vector<std::string>& bio_labels);

  const std::vector<std::string>& slots() const { return slots_; }
  const std::vector<std::string>& bio_labels() const { return bio_labels_; }
  std::size_t size() const { return bio_labels_.size(); }

  bool contains(std::string_view label) const;
  // Throws Error for unknown labels.
  int id(std::string_view label) const;
  const std::string& label(int id) const;
  const BioTag& tag(int id) const { return tags_.at(static_cast<std::size_t>(id)); }

  std::vector<int> encode(const std::vector<std::string>& labels) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.slots_ == b.slots_;
  }

 private:
  std::vector<std::string> slots_;
  std::vector<std::string> bio_labels_;
  std::vector<BioTag> tags_;
  std::map<std::string, int, std::less<>> index_;
};

struct Domain {
  std::string name;
  std::vector<Sentence> sentences;
  LabelSet label_set;

  friend bool operator==(const Domain&, const Domain&) = default;
};

// Builds a domain whose label set is derived from the observed slots.
Domain make_domain(std::string name, std::vector<Sentence> sentences);

// Two-column "token<TAB>label" text, blank line between sentences. The domain
// name defaults to the file stem.
Domain load_conll(const std::filesystem::path& path,
                  std::optional<std::string> name = std::nullopt);
Domain parse_conll(std::string_view text, std::string name);
void write_conll(const Domain& domain, const std::filesystem::path& path);

// {"name": ..., "sentences": [{"tokens": [...], "labels": [...]}]}
Domain load_json(const std::filesystem::path& path);
Domain parse_json(std::string_view text);
void write_json(const Domain& domain, const std::filesystem::path& path);

// Dispatches on extension: .json -> load_json, anything else -> load_conll.
Domain load_domain(const std::filesystem::path& path);

struct BioViolation {
  std::size_t index = 0;
  std::string label;
  std::string message;

  friend bool operator==(const BioViolation&, const BioViolation&) = default;
};

// Strict mode flags every I-x not preceded by B-x or I-x. Lenient mode only
// reports labels outside the BIO alphabet.
std::vector<BioViolation> validate_bio(const Sentence& sentence, bool strict);

}  // namespace fewshot
