#include "lpspul/table.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lpspul/io.hpp"

namespace lpspul {

int Table::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Column Table::take_column(const std::string& name) {
  const int i = find_column(name);
  if (i < 0) throw data_error("column not found: " + name);
  Column c = std::move(columns[static_cast<std::size_t>(i)]);
  columns.erase(columns.begin() + i);
  return c;
}

Table Table::select_rows(const std::vector<std::size_t>& idx) const {
  Table out;
  out.columns.reserve(columns.size());
  for (const Column& c : columns) {
    Column nc;
    nc.name = c.name;
    nc.numeric = c.numeric;
    nc.missing.reserve(idx.size());
    if (c.numeric) {
      nc.num.reserve(idx.size());
      for (std::size_t r : idx) {
        nc.num.push_back(c.num[r]);
        nc.missing.push_back(c.missing[r]);
      }
    } else {
      nc.cat.reserve(idx.size());
      for (std::size_t r : idx) {
        nc.cat.push_back(c.cat[r]);
        nc.missing.push_back(c.missing[r]);
      }
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

Table parse_csv(const std::string& text, const std::string& missing_token) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV input");
  const auto header = split_csv_line(line);
  const std::size_t ncols = header.size();

  // Collect raw cells first; column types are decided after the full pass.
  std::vector<std::vector<std::string>> cells(ncols);
  std::vector<std::vector<std::uint8_t>> missing(ncols);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto row = split_csv_line(line);
    if (row.size() != ncols) {
      throw data_error("CSV row at line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                       " cells, expected " + std::to_string(ncols));
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const bool miss = row[c] == missing_token;
      missing[c].push_back(miss ? 1 : 0);
      cells[c].push_back(miss ? std::string() : row[c]);
    }
  }

  Table table;
  table.columns.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    Column& col = table.columns[c];
    col.name = header[c];
    col.missing = std::move(missing[c]);
    bool all_numeric = true;
    std::vector<double> nums(cells[c].size(), 0.0);
    for (std::size_t r = 0; r < cells[c].size(); ++r) {
      if (col.missing[r]) continue;
      if (!parse_double(cells[c][r], nums[r])) {
        all_numeric = false;
        break;
      }
    }
    col.numeric = all_numeric;
    if (all_numeric) {
      col.num = std::move(nums);
    } else {
      col.cat = std::move(cells[c]);
    }
  }
  return table;
}

Table load_csv(const std::string& path, const std::string& missing_token) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), missing_token);
}

namespace {

std::string csv_escape(const std::string& s) {
  bool needs = false;
  for (char ch : s) {
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

}  // namespace

void write_csv(const Table& table, const std::string& path) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (c) out << ',';
    out << csv_escape(table.columns[c].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      const Column& col = table.columns[c];
      if (col.missing[r]) {
        out << '?';
      } else if (col.numeric) {
        out << format_double(col.num[r]);
      } else {
        out << csv_escape(col.cat[r]);
      }
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace lpspul
