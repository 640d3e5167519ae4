#include "crowdcount/key_value.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "crowdcount/error.hpp"

namespace crowdcount {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  kv.section_order_.push_back("");
  kv.data_[""];
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kv.data_.contains(section)) kv.section_order_.push_back(section);
      kv.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv.data_[section][key].push_back(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

std::vector<std::string> KeyValueFile::sections() const { return section_order_; }

bool KeyValueFile::has(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  return s != data_.end() && s->second.contains(key);
}

std::optional<std::string> KeyValueFile::get(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end() || k->second.empty()) return std::nullopt;
  return k->second.back();
}

std::vector<std::string> KeyValueFile::get_all(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return {};
  const auto k = s->second.find(key);
  return k == s->second.end() ? std::vector<std::string>{} : k->second;
}

std::string KeyValueFile::require(const std::string& section, const std::string& key) const {
  auto v = get(section, key);
  if (!v) {
    const std::string where = section.empty() ? "" : " in [" + section + "]";
    throw ConfigError(origin_ + ": missing key '" + key + "'" + where);
  }
  return *v;
}

double KeyValueFile::require_double(const std::string& section, const std::string& key) const {
  return parse_double(require(section, key), origin_ + ": " + key);
}

const std::map<std::string, std::vector<std::string>>& KeyValueFile::entries(const std::string& section) const {
  static const std::map<std::string, std::vector<std::string>> empty;
  const auto s = data_.find(section);
  return s == data_.end() ? empty : s->second;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + text + "'");
  }
}

long parse_long(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": not an integer: '" + text + "'");
  }
}

bool parse_bool(const std::string& text, const std::string& what) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
  throw ConfigError(what + ": not a boolean: '" + text + "'");
}

}  // namespace crowdcount
