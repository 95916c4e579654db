#pragma once
// Comma-separated tables. Fields holding commas or quotes (experiment labels
// such as "SUSFAS Gen[0,1]") are double-quoted.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sflab::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

Table read(const std::filesystem::path& path);
Table parse(const std::string& text);

/// Round-trip representation of a double.
std::string field(double v);
std::string field(const std::string& s);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace sflab::csv
