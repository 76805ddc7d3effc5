#pragma once

#include <Eigen/Dense>
#include <vector>

#include "parcelingam/errors.hpp"

namespace parcelingam {

/// Observations of d variables over n samples. Rows are variables, columns
/// are samples. Variable ids are stable integer identifiers that survive
/// subsetting, so downstream results always refer to the original variables.
struct DataMatrix {
  Eigen::MatrixXd values;         // d x n
  std::vector<int> variable_ids;  // length d, distinct

  int d() const { return static_cast<int>(values.rows()); }
  int n() const { return static_cast<int>(values.cols()); }

  /// Throws std::invalid_argument if shape, finiteness, or id invariants fail.
  void validate() const;

  /// Row position of an id; throws IdMismatch if absent.
  int position_of(int id) const;

  /// New matrix holding only the given ids, in the given order.
  DataMatrix subset(const std::vector<int>& ids) const;
};

/// Subtracts each row's sample mean. Idempotent.
DataMatrix center(const DataMatrix& x);

/// Residuals of several variables regressed on one shared regressor.
struct ResidualSet {
  Eigen::MatrixXd residuals;      // one row per regressed-out variable
  std::vector<int> residual_ids;  // ids of the rows, in matrix order
  int source_id = -1;             // the shared regressor
};

}  // namespace parcelingam
