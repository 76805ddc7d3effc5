#include "parcelingam/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace parcelingam {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw ParseError("no data rows", 1, 1);
  ++line_no;
  CsvTable table;
  for (auto& name : split_line(line)) table.column_names.push_back(trim(name));
  const int cols = static_cast<int>(table.column_names.size());
  if (cols < 2) throw ParseError("need at least 2 columns", 1, 1);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (static_cast<int>(cells.size()) != cols)
      throw ParseError("ragged row: expected " + std::to_string(cols) +
                           " cells, got " + std::to_string(cells.size()),
                       line_no, static_cast<int>(cells.size()));
    std::vector<double> row(cols);
    for (int c = 0; c < cols; ++c) {
      const std::string cell = trim(cells[c]);
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end)
        throw ParseError("non-numeric cell '" + cell + "'", line_no, c + 1);
      row[c] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", line_no, 1);

  table.values.resize(static_cast<int>(rows.size()), cols);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (int c = 0; c < cols; ++c) table.values(r, c) = rows[r][c];
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const std::vector<std::string>& column_names,
               const Eigen::MatrixXd& samples_by_rows) {
  for (size_t c = 0; c < column_names.size(); ++c)
    out << (c ? "," : "") << column_names[c];
  out << "\n";
  out.precision(17);
  for (int r = 0; r < samples_by_rows.rows(); ++r) {
    for (int c = 0; c < samples_by_rows.cols(); ++c)
      out << (c ? "," : "") << samples_by_rows(r, c);
    out << "\n";
  }
}

DataMatrix to_data_matrix(const CsvTable& table, bool transpose) {
  DataMatrix data;
  if (transpose) {
    data.values = table.values;
  } else {
    data.values = table.values.transpose();
  }
  data.variable_ids.resize(static_cast<int>(data.values.rows()));
  for (int i = 0; i < data.values.rows(); ++i) data.variable_ids[i] = i + 1;
  return data;
}

}  // namespace parcelingam
