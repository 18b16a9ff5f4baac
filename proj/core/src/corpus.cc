#include "fewshot/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fewshot/error.h"

namespace fewshot {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void check_sentence(const Sentence& sentence, const std::string& where) {
  if (sentence.tokens.empty()) throw ParseError(where + ": empty sentence");
  if (sentence.tokens.size() != sentence.labels.size()) {
    throw ParseError(where + ": " + std::to_string(sentence.tokens.size()) +
                     " tokens but " + std::to_string(sentence.labels.size()) +
                     " labels");
  }
  for (const auto& label : sentence.labels) {
    if (!parse_bio(label)) throw ParseError(where + ": invalid label \"" + label + "\"");
  }
}

}  // namespace

std::optional<BioTag> parse_bio(std::string_view label) {
  if (label == "O") return BioTag{};
  if (label.size() < 3 || label[1] != '-') return std::nullopt;
  BioTag tag;
  if (label[0] == 'B') {
    tag.kind = Bio::kB;
  } else if (label[0] == 'I') {
    tag.kind = Bio::kI;
  } else {
    return std::nullopt;
  }
  tag.slot = std::string(label.substr(2));
  return tag;
}

std::string format_bio(const BioTag& tag) {
  switch (tag.kind) {
    case Bio::kO:
      return "O";
    case Bio::kB:
      return "B-" + tag.slot;
    case Bio::kI:
      return "I-" + tag.slot;
  }
  return "O";
}

LabelSet::LabelSet(std::vector<std::string> slots) : slots_(std::move(slots)) {
  std::sort(slots_.begin(), slots_.end());
  slots_.erase(std::unique(slots_.begin(), slots_.end()), slots_.end());
  bio_labels_.reserve(2 * slots_.size() + 1);
  tags_.reserve(2 * slots_.size() + 1);
  bio_labels_.push_back("O");
  tags_.push_back(BioTag{});
  for (const auto& slot : slots_) {
    if (slot.empty()) throw Error("empty slot name");
    tags_.push_back(BioTag{Bio::kB, slot});
    bio_labels_.push_back("B-" + slot);
    tags_.push_back(BioTag{Bio::kI, slot});
    bio_labels_.push_back("I-" + slot);
  }
  for (std::size_t i = 0; i < bio_labels_.size(); ++i) {
    index_.emplace(bio_labels_[i], static_cast<int>(i));
  }
}

LabelSet LabelSet::from_bio_labels(const std::vector<std::string>& bio_labels) {
  std::vector<std::string> slots;
  for (const auto& label : bio_labels) {
    auto tag = parse_bio(label);
    if (!tag) throw ParseError("invalid label \"" + label + "\" in label set");
    if (tag->kind == Bio::kB) slots.push_back(tag->slot);
  }
  LabelSet result(std::move(slots));
  if (result.bio_labels() != bio_labels) {
    throw ParseError("label set is not in canonical [O, B-s, I-s, ...] order");
  }
  return result;
}

bool LabelSet::contains(std::string_view label) const {
  return index_.find(label) != index_.end();
}

int LabelSet::id(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw Error("label \"" + std::string(label) + "\" not in label set");
  return it->second;
}

const std::string& LabelSet::label(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= bio_labels_.size()) {
    throw Error("label id " + std::to_string(id) + " out of range");
  }
  return bio_labels_[static_cast<std::size_t>(id)];
}

std::vector<int> LabelSet::encode(const std::vector<std::string>& labels) const {
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (const auto& label : labels) ids.push_back(id(label));
  return ids;
}

std::vector<std::string> LabelSet::decode(const std::vector<int>& ids) const {
  std::vector<std::string> labels;
  labels.reserve(ids.size());
  for (int i : ids) labels.push_back(label(i));
  return labels;
}

Domain make_domain(std::string name, std::vector<Sentence> sentences) {
  std::set<std::string> slots;
  for (const auto& sentence : sentences) {
    for (const auto& label : sentence.labels) {
      auto tag = parse_bio(label);
      if (!tag) throw ParseError("invalid label \"" + label + "\"");
      if (tag->kind != Bio::kO) slots.insert(tag->slot);
    }
  }
  LabelSet label_set(std::vector<std::string>(slots.begin(), slots.end()));
  return Domain{std::move(name), std::move(sentences), std::move(label_set)};
}

Domain parse_conll(std::string_view text, std::string name) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = Sentence{};
  };
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      flush();
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected \"token<TAB>label\"");
    }
    std::string_view token = line.substr(0, tab);
    std::string_view label = line.substr(tab + 1);
    if (token.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty token");
    if (!parse_bio(label)) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid label \"" +
                       std::string(label) + "\"");
    }
    current.tokens.emplace_back(token);
    current.labels.emplace_back(label);
  }
  flush();
  if (sentences.empty()) throw ParseError("no sentences");
  return make_domain(std::move(name), std::move(sentences));
}

Domain load_conll(const std::filesystem::path& path, std::optional<std::string> name) {
  const std::string text = read_file(path);
  try {
    return parse_conll(text, name ? *name : path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_conll(const Domain& domain, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t s = 0; s < domain.sentences.size(); ++s) {
    if (s > 0) out << '\n';
    const auto& sentence = domain.sentences[s];
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      out << sentence.tokens[i] << '\t' << sentence.labels[i] << '\n';
    }
  }
}

Domain parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("domain document must be an object");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw ParseError("domain document needs a string field \"name\"");
  }
  if (!doc.contains("sentences") || !doc["sentences"].is_array()) {
    throw ParseError("domain document needs an array field \"sentences\"");
  }
  std::vector<Sentence> sentences;
  std::size_t index = 0;
  for (const auto& item : doc["sentences"]) {
    const std::string where = "sentence " + std::to_string(index++);
    if (!item.is_object() || !item.contains("tokens") || !item.contains("labels")) {
      throw ParseError(where + ": needs \"tokens\" and \"labels\"");
    }
    Sentence sentence;
    try {
      sentence.tokens = item["tokens"].get<std::vector<std::string>>();
      sentence.labels = item["labels"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError(where + ": tokens and labels must be string arrays");
    }
    check_sentence(sentence, where);
    sentences.push_back(std::move(sentence));
  }
  if (sentences.empty()) throw ParseError("no sentences");
  return make_domain(doc["name"].get<std::string>(), std::move(sentences));
}

Domain load_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_json(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const Domain& domain, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["name"] = domain.name;
  doc["sentences"] = nlohmann::json::array();
  for (const auto& sentence : domain.sentences) {
    doc["sentences"].push_back({{"tokens", sentence.tokens}, {"labels", sentence.labels}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

Domain load_domain(const std::filesystem::path& path) {
  if (path.extension() == ".json") return load_json(path);
  return load_conll(path);
}

std::vector<BioViolation> validate_bio(const Sentence& sentence, bool strict) {
  std::vector<BioViolation> violations;
  std::optional<BioTag> previous;
  for (std::size_t i = 0; i < sentence.labels.size(); ++i) {
    const auto& label = sentence.labels[i];
    auto tag = parse_bio(label);
    if (!tag) {
      violations.push_back({i, label, "not a BIO label"});
      previous.reset();
      continue;
    }
    if (strict && tag->kind == Bio::kI) {
      const bool continues = previous && previous->kind != Bio::kO && previous->slot == tag->slot;
      if (!continues) {
        violations.push_back({i, label, "I-" + tag->slot + " does not follow B-" +
                                            tag->slot + " or I-" + tag->slot});
      }
    }
    previous = std::move(tag);
  }
  if (sentence.tokens.size() != sentence.labels.size()) {
    violations.push_back({sentence.labels.size(), "", "token/label length mismatch"});
  }
  return violations;
}

}  // namespace fewshot
