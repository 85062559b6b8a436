#pragma once

#include <string>
#include <vector>

#include "due/data/dataset.hpp"

namespace due {

// Comma-separated, header row, UTF-8, '.' decimal separator, no thousands
// separators. Rows with non-numeric cells are rejected with their index.

struct CsvSchema {
  std::vector<std::string> feature_columns;  // empty: all non-target columns
  std::string target_column = "y";
  std::string treatment_column;  // empty: none
};

// Loads values as-is (no standardization; scaler is identity).
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Writes features, target, and treatment (when present) with full
// precision so a reload reproduces the dataset exactly.
void write_csv(const Dataset& ds, const std::string& path,
               const CsvSchema& schema);

// Generic plot-data writer: header + rows.
void write_csv_table(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace due
