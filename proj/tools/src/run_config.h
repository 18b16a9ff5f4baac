#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fewshot::cli {

// Flat view of a run configuration. Keys are "section.name" ("seed" and
// "threads" live at top level). Values are kept as text and converted on
// access so flag overrides and file values go through the same checks.
//
// File syntax:
//   # comment
//   seed = 3
//   [model]
//   variant = "l-tapnet"
//   ablate = ["cdt", "prototype"]
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // Throws ConfigError for keys outside the known set.
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.contains(key); }

  std::optional<std::string> text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::optional<double> real(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::optional<long long> integer(const std::string& key) const;
  long long integer(const std::string& key, long long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;

  // Path that must already exist; ConfigError otherwise.
  std::filesystem::path existing_path(const std::string& key) const;
  std::optional<std::filesystem::path> optional_path(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

bool is_known_key(std::string_view key);
const std::vector<std::string>& known_keys();

}  // namespace fewshot::cli
