#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crowdcount {

// Flat `key = value` text with optional `[section]` headers and `#` comments.
// Keys outside any section live in the "" section. Repeated keys accumulate.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  std::vector<std::string> sections() const;
  bool has(const std::string& section, const std::string& key) const;

  // Last value for the key, if any.
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  // Throws ConfigError naming the origin when missing or unparsable.
  std::string require(const std::string& section, const std::string& key) const;
  double require_double(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::vector<std::string>>& entries(const std::string& section) const;
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::vector<std::string> section_order_;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> data_;
};

double parse_double(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);

}  // namespace crowdcount
