#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace ratesculpt {

using Json = nlohmann::ordered_json;

// Serializes with insertion-ordered keys and every floating-point value printed
// with a fixed number of decimals, so documents are byte-stable across runs.
// indent < 0 gives a single line.
std::string dump_canonical(const Json& value, int indent = 2, int decimals = 6);

std::string format_fixed(double value, int decimals = 6);

// Rounds to the precision dump_canonical writes.
double quantize(double value, int decimals = 6);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ratesculpt
