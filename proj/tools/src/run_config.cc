#include "run_config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fewshot/error.h"

namespace fewshot::cli {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops a trailing "# ..." that is not inside quotes.
std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

// Arrays are stored as comma-joined text.
std::string normalize_value(const std::string& raw) {
  std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
    std::string joined;
    std::stringstream items(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      item = unquote(trim(item));
      if (item.empty()) continue;
      if (!joined.empty()) joined += ',';
      joined += item;
    }
    return joined;
  }
  return unquote(v);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "seed",
      "seeds",
      "threads",
      "paths.domains",
      "paths.train_episodes",
      "paths.dev_episodes",
      "paths.episodes",
      "paths.store",
      "paths.checkpoint",
      "paths.report",
      "paths.table",
      "paths.csv",
      "paths.out",
      "paths.out_dir",
      "model.variant",
      "model.alpha",
      "model.beta",
      "model.d_proj",
      "model.pool_rows",
      "model.hash_dim",
      "model.hash_seed",
      "model.o_text",
      "model.ablate",
      "train.learning_rate",
      "train.batch_episodes",
      "train.patience",
      "train.max_steps",
      "train.eval_every",
      "eval.decoder",
      "eval.strict",
      "eval.bigrams",
      "sampler.k",
      "sampler.episodes",
      "sampler.queries",
      "sampler.skip_prob",
      "gradcheck.eps",
      "gradcheck.tol",
      "gradcheck.count",
      "gradcheck.inject_fault",
      "synth.domains",
      "synth.slots",
      "synth.sentences",
  };
  return keys;
}

bool is_known_key(std::string_view key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig config;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string name = trim(std::string_view(line).substr(0, eq));
    if (name.empty()) throw ConfigError(where + "missing key");
    const std::string key = section.empty() ? name : section + "." + name;
    if (!is_known_key(key)) throw ConfigError(where + "unknown key \"" + key + "\"");
    config.values_[key] = normalize_value(line.substr(eq + 1));
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void RunConfig::set(const std::string& key, std::string value) {
  if (!is_known_key(key)) throw ConfigError("unknown key \"" + key + "\"");
  values_[key] = normalize_value(value);
}

std::optional<std::string> RunConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  return text(key).value_or(fallback);
}

std::optional<double> RunConfig::real(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || end != v->data() + v->size()) {
    throw ConfigError(key + ": expected a number, got \"" + *v + "\"");
  }
  return out;
}

double RunConfig::real(const std::string& key, double fallback) const {
  return real(key).value_or(fallback);
}

std::optional<long long> RunConfig::integer(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  long long out = 0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || end != v->data() + v->size()) {
    throw ConfigError(key + ": expected an integer, got \"" + *v + "\"");
  }
  return out;
}

long long RunConfig::integer(const std::string& key, long long fallback) const {
  return integer(key).value_or(fallback);
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  auto v = text(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key + ": expected true or false, got \"" + *v + "\"");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  auto v = text(key);
  if (!v) return out;
  std::stringstream items(*v);
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::filesystem::path RunConfig::existing_path(const std::string& key) const {
  auto v = text(key);
  if (!v || v->empty()) throw ConfigError("missing required setting " + key);
  std::filesystem::path p(*v);
  if (!std::filesystem::exists(p)) throw ConfigError(key + ": no such file " + p.string());
  return p;
}

std::optional<std::filesystem::path> RunConfig::optional_path(const std::string& key) const {
  auto v = text(key);
  if (!v || v->empty()) return std::nullopt;
  return std::filesystem::path(*v);
}

}  // namespace fewshot::cli
