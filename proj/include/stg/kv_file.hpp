#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stg {

// Flat "key = value" text with optional [section] headers and '#' comments.
// Keys inside a section are stored as "section.key".
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list; an empty value gives an empty list.
  std::vector<std::string> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Sorted by key, sections regrouped; parse(to_string()) reproduces values().
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace stg
