#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "parcelingam/data_matrix.hpp"

namespace parcelingam {

/// A parsed data CSV: samples as rows, one column per variable.
struct CsvTable {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;  // rows = samples, cols = variables
};

/// Parses a data CSV (UTF-8, header row, '.' decimal separator).
/// Throws ParseError with a line/column diagnostic on malformed input,
/// non-numeric cells, ragged rows, or missing data rows.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Writes samples as rows with the variable names as the header.
void write_csv(std::ostream& out, const std::vector<std::string>& column_names,
               const Eigen::MatrixXd& samples_by_rows);

/// DataMatrix (variables as rows) from a parsed table; ids are 1..d in
/// column order. Set transpose when the file holds variables as rows.
DataMatrix to_data_matrix(const CsvTable& table, bool transpose = false);

}  // namespace parcelingam
