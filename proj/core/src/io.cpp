#include "stylespace/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "stylespace/error.hpp"

namespace stylespace {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kMissingFile: return "missing_file";
    case ErrorKind::kDecode: return "decode";
    case ErrorKind::kDuplicateId: return "duplicate_id";
    case ErrorKind::kCountMismatch: return "count_mismatch";
    case ErrorKind::kUnknownId: return "unknown_id";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kOutOfBounds: return "out_of_bounds";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kAuth: return "auth";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kUpstream: return "upstream";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open " + path.string(), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kMissingFile, "cannot write " + path.string(), path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::kMissingFile, "short write to " + path.string(), path.string());
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what(), path.string());
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  write_file(path, value.dump(2) + "\n");
}

void write_json(const std::filesystem::path& path, const OrderedJson& value) {
  write_file(path, value.dump(2) + "\n");
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

}  // namespace stylespace
