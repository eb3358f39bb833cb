#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kerbside::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC-4180: comma delimiter, double-quote quoting with "" escapes, CRLF or LF
// line endings. A UTF-8 BOM is skipped. Blank lines are ignored.
std::vector<Record> parse(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace kerbside::csv
