#include "stg/kv_file.hpp"

#include <sstream>

#include "stg/csv.hpp"
#include "stg/error.hpp"

namespace stg {

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw Error(ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": bad section header");
      }
      section = csv::trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = csv::trim(t.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": empty key");
    kv.values_[section.empty() ? key : section + "." + key] = csv::trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  return parse(csv::read_text(path), path.string());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return csv::parse_double(*v);
  } catch (const Error&) {
    throw Error(ErrorCode::parse, origin_ + ": key '" + key + "' is not a number");
  }
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return csv::parse_int(*v);
  } catch (const Error&) {
    throw Error(ErrorCode::parse, origin_ + ": key '" + key + "' is not an integer");
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw Error(ErrorCode::parse, origin_ + ": key '" + key + "' is not a boolean");
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const auto v = get(key);
  if (!v || csv::trim(*v).empty()) return out;
  for (const auto& item : csv::split(*v)) {
    const std::string t = csv::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string KeyValueFile::to_string() const {
  std::string plain;
  std::map<std::string, std::string> sections;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      plain += key + " = " + value + "\n";
    } else {
      auto& body = sections[key.substr(0, dot)];
      body += key.substr(dot + 1) + " = " + value + "\n";
    }
  }
  std::string out = plain;
  for (const auto& [name, body] : sections) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n" + body;
  }
  return out;
}

}  // namespace stg
