#include "stylespace/csv.hpp"

#include "stylespace/error.hpp"
#include "stylespace/io.hpp"

namespace stylespace {
namespace {

void append_field(std::string& out, const std::string& field) {
  const bool quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!quote) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    append_field(out, row[i]);
  }
  out += '\n';
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::kSchema, "missing CSV column '" + name + "'", name);
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (const auto& comment : table.comments) out += "# " + comment + "\n";
  append_row(out, table.header);
  for (const auto& row : table.rows) append_row(out, row);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool at_line_start = true;
  bool have_header = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (at_line_start && !have_header && text[i] == '#') {
      std::size_t end = text.find('\n', i);
      if (end == std::string::npos) end = n;
      std::string comment = text.substr(i + 1, end - i - 1);
      if (!comment.empty() && comment.front() == ' ') comment.erase(0, 1);
      if (!comment.empty() && comment.back() == '\r') comment.pop_back();
      table.comments.push_back(std::move(comment));
      i = end + 1;
      continue;
    }
    at_line_start = false;
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      have_header = true;
      at_line_start = true;
    } else {
      field += c;
    }
    ++i;
  }
  if (in_quotes) throw Error(ErrorKind::kSchema, "unterminated quoted CSV field");
  if (!field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw Error(ErrorKind::kSchema,
                  "CSV row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_file(path, to_csv(table));
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

}  // namespace stylespace
