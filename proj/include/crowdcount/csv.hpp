#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace crowdcount {

// Comma-separated rows. Blank lines and lines starting with '#' are skipped;
// a first row whose first field is not numeric is treated as a header and dropped.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Field parsers that report failures as DataError.
double csv_double(const std::string& field, const std::string& where);
long csv_long(const std::string& field, const std::string& where);

}  // namespace crowdcount
