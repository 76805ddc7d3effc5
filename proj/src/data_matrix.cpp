#include "parcelingam/data_matrix.hpp"

#include <set>
#include <stdexcept>

namespace parcelingam {

void DataMatrix::validate() const {
  if (values.rows() < 2) throw std::invalid_argument("DataMatrix needs d >= 2 variables");
  if (values.cols() < 3) throw std::invalid_argument("DataMatrix needs n >= 3 samples");
  if (!values.allFinite()) throw std::invalid_argument("DataMatrix has non-finite entries");
  if (static_cast<int>(variable_ids.size()) != d())
    throw std::invalid_argument("variable_ids length must match row count");
  std::set<int> seen(variable_ids.begin(), variable_ids.end());
  if (static_cast<int>(seen.size()) != d())
    throw std::invalid_argument("variable_ids must be distinct");
}

int DataMatrix::position_of(int id) const {
  for (int i = 0; i < d(); ++i)
    if (variable_ids[i] == id) return i;
  throw IdMismatch("variable id " + std::to_string(id) + " not present");
}

DataMatrix DataMatrix::subset(const std::vector<int>& ids) const {
  DataMatrix out;
  out.values.resize(static_cast<int>(ids.size()), n());
  out.variable_ids = ids;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i)
    out.values.row(i) = values.row(position_of(ids[i]));
  return out;
}

DataMatrix center(const DataMatrix& x) {
  DataMatrix out = x;
  out.values.colwise() -= x.values.rowwise().mean();
  return out;
}

}  // namespace parcelingam
