#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace stylespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

Json read_json(const std::filesystem::path& path);
/// Two-space indented dump terminated by a newline; byte-stable for equal input.
void write_json(const std::filesystem::path& path, const Json& value);
void write_json(const std::filesystem::path& path, const OrderedJson& value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace stylespace
