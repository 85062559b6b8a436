#include "due/data/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "due/core/error.hpp"

namespace due {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row_index,
                  const std::string& column) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r' || end[-1] == '\t'))
    --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ArgumentError("csv: non-numeric cell in row " +
                        std::to_string(row_index) + ", column '" + column +
                        "': '" + cell + "'");
  }
  return value;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("csv: empty file: " + path);
  auto header = split_line(line);
  for (auto& h : header) h = trim(h);

  auto find_col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError("csv: header missing column '" + name + "'", name);
  };

  const std::size_t target_col = find_col(schema.target_column);
  std::size_t treatment_col = SIZE_MAX;
  if (!schema.treatment_column.empty())
    treatment_col = find_col(schema.treatment_column);

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == target_col || i == treatment_col) continue;
      feature_cols.push_back(i);
      feature_names.push_back(header[i]);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      feature_cols.push_back(find_col(name));
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty())
    throw ConfigError("csv: no feature columns", "features");

  std::vector<double> xs, ys, ts;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    ++row_index;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ArgumentError("csv: row " + std::to_string(row_index) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(header.size()));
    for (std::size_t c = 0; c < feature_cols.size(); ++c)
      xs.push_back(parse_cell(cells[feature_cols[c]], row_index,
                              feature_names[c]));
    ys.push_back(parse_cell(cells[target_col], row_index,
                            schema.target_column));
    if (treatment_col != SIZE_MAX)
      ts.push_back(parse_cell(cells[treatment_col], row_index,
                              schema.treatment_column));
  }

  const std::size_t n = ys.size();
  const std::size_t d = feature_cols.size();
  Dataset ds;
  ds.x = Tensor(Shape{n, d}, std::move(xs));
  ds.y = Tensor(Shape{n, 1}, std::move(ys));
  ds.treatment = std::move(ts);
  ds.scaler = Scaler::identity(d);
  ds.train_idx.resize(n);
  std::iota(ds.train_idx.begin(), ds.train_idx.end(), std::size_t{0});
  ds.provenance.generator = "csv:" + path;
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path,
               const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("csv: cannot write file: " + path);

  const std::size_t d = ds.dim();
  std::vector<std::string> names = schema.feature_columns;
  if (names.size() != d) {
    names.clear();
    for (std::size_t c = 0; c < d; ++c) names.push_back("x" + std::to_string(c));
  }
  for (const auto& nm : names) out << nm << ",";
  out << schema.target_column;
  const bool with_t = !ds.treatment.empty() && !schema.treatment_column.empty();
  if (with_t) out << "," << schema.treatment_column;
  out << "\n";

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      put(ds.x.at(i, c));
      out << ",";
    }
    put(ds.y.at(i, 0));
    if (with_t) {
      out << ",";
      put(ds.treatment[i]);
    }
    out << "\n";
  }
}

void write_csv_table(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("csv: cannot write file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ",";
    out << header[i];
  }
  out << "\n";
  char buf[32];
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ArgumentError("csv table: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace due
