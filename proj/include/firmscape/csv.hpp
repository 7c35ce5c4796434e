#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "firmscape/types.hpp"

namespace firmscape::csv {

inline std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split(std::string_view line, char delim = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::int64_t parse_int(std::string_view field, int line_no, std::string_view column) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ValidationError("line " + std::to_string(line_no) + ": bad integer in column " +
                          std::string(column) + " ('" + std::string(field) + "')");
  return value;
}

inline double parse_real(std::string_view field, int line_no, std::string_view column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ValidationError("line " + std::to_string(line_no) + ": bad number in column " +
                          std::string(column) + " ('" + std::string(field) + "')");
  return value;
}

inline void expect_header(std::string_view got, std::string_view want) {
  if (trim_cr(got) != want)
    throw ValidationError("expected header '" + std::string(want) + "', got '" +
                          std::string(trim_cr(got)) + "'");
}

}  // namespace firmscape::csv
