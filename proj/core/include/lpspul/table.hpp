#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpspul/errors.hpp"

namespace lpspul {

/// One column of a raw data table. Numeric columns keep doubles, categorical
/// columns keep strings; `missing` marks cells that held the missing token.
struct Column {
  std::string name;
  bool numeric = true;
  std::vector<double> num;
  std::vector<std::string> cat;
  std::vector<std::uint8_t> missing;

  std::size_t rows() const { return missing.size(); }
};

struct Table {
  std::vector<Column> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().rows(); }
  std::size_t cols() const { return columns.size(); }

  int find_column(const std::string& name) const;  // -1 when absent
  /// Removes and returns a column by name; throws data_error when absent.
  Column take_column(const std::string& name);
  Table select_rows(const std::vector<std::size_t>& idx) const;
};

/// Reads an RFC-style CSV with a header row. A column becomes numeric when
/// every non-missing cell parses as a double. Cells equal to missing_token
/// are flagged missing. Ragged rows raise data_error with the line number.
Table load_csv(const std::string& path, const std::string& missing_token = "?");
Table parse_csv(const std::string& text, const std::string& missing_token = "?");

void write_csv(const Table& table, const std::string& path);

}  // namespace lpspul
