#include "crowdcount/csv.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "crowdcount/error.hpp"

namespace crowdcount {

namespace {

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  const char c = s.front();
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const auto a = field.find_first_not_of(" \t");
      const auto b = field.find_last_not_of(" \t");
      fields.push_back(a == std::string::npos ? std::string{} : field.substr(a, b - a + 1));
    }
    if (first && !fields.empty() && !looks_numeric(fields.front())) {
      first = false;
      continue;
    }
    first = false;
    rows.push_back(std::move(fields));
  }
  return rows;
}

double csv_double(const std::string& field, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(where + ": not a number: '" + field + "'");
}

long csv_long(const std::string& field, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(where + ": not an integer: '" + field + "'");
}

}  // namespace crowdcount
