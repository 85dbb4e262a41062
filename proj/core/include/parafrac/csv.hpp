#pragma once

// CSV tables: comma separated, '.' decimal point, one header row, LF line
// endings. Fields containing a comma, quote or newline are quoted.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace parafrac {

/// Shortest decimal text that reads back to the same double.
std::string csv_number(double v);
std::string csv_escape(std::string_view field);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  /// Throws ParameterError when the row width differs from the header.
  void add_row(std::vector<std::string> row);
  /// Index of a header column; throws InputError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  std::string to_csv() const;
  /// Space-aligned columns for terminal output.
  std::string to_table() const;
  void write(const std::string& path) const;

  static CsvTable parse(std::string_view text);
  static CsvTable read(const std::string& path);

  static std::string header_line(const std::vector<std::string>& fields);
  static std::string row_line(const std::vector<std::string>& fields) { return header_line(fields); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace parafrac
