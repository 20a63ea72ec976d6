#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stylespace {

/// Minimal RFC 4180 table. Lines starting with '#' before the header are
/// comments (used for config fingerprints) and are preserved on write only.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws kSchema if absent
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace stylespace
