#pragma once

// Internal CSV row plumbing shared by the core readers. Not installed.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "anomdiff/csv.hpp"

namespace anomdiff::csvdetail {

[[noreturn]] inline void fail(const std::string& path, std::size_t line, const std::string& reason) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + reason);
}

inline double parse_double_field(std::string_view field, const std::string& path, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    fail(path, line, "expected a number, got '" + std::string(field) + "'");
  }
  return v;
}

inline long parse_int_field(std::string_view field, const std::string& path, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    fail(path, line, "expected an integer, got '" + std::string(field) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(row.substr(start));
      break;
    }
    fields.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// Iterates non-empty CSV rows after checking the header. The callback gets
// (1-based line number, fields).
template <typename RowFn>
void for_each_row(const std::string& path, const std::string& expected_header, RowFn&& fn) {
  const std::string text = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view row(text.data() + pos, eol - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    ++line_no;
    if (!saw_header) {
      if (row != expected_header) {
        fail(path, line_no, "expected header '" + expected_header + "'");
      }
      saw_header = true;
    } else if (!row.empty()) {
      fn(line_no, split_fields(row));
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  if (!saw_header) fail(path, 1, "empty file, expected header '" + expected_header + "'");
}

}  // namespace anomdiff::csvdetail
