#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "parcelingam/errors.hpp"

namespace parcelingam {

/// Result of a single HSIC test between two scalar samples.
struct HsicResult {
  double statistic = 0.0;  // biased HSIC estimate, scaled by n
  double p_value = 1.0;    // two-moment gamma approximation of the null
  int n = 0;               // samples actually used (after any cap)
  double bandwidth_u = 0.0;
  double bandwidth_v = 0.0;
};

/// Fisher's method over c independent p-values.
struct FisherCombination {
  double statistic = 0.0;       // -2 sum log p_i
  int degrees_of_freedom = 0;   // 2c
  double p_value = 1.0;         // chi-square survival at the statistic
  std::vector<double> component_p_values;
};

struct HsicOptions {
  /// When set and n exceeds the cap, both inputs are subsampled with a
  /// deterministic stride before the Gram matrices are formed.
  std::optional<int> sample_cap;
};

/// Gaussian Gram matrix of a scalar sample, already doubly centered, plus
/// the raw off-diagonal mean needed for the gamma null moments.
struct GramMatrix {
  Eigen::MatrixXd centered;
  double mean_offdiag = 0.0;
  double bandwidth = 0.0;
  int n = 0;
};

/// Median of pairwise absolute differences; 1.0 when the median is zero.
double median_heuristic_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& u);

/// Builds the centered Gram matrix. Throws ConstantInput when the sample
/// variance is at or below the degeneracy floor.
GramMatrix compute_gram(const Eigen::Ref<const Eigen::VectorXd>& u);

/// HSIC from precomputed Gram matrices (both over the same n samples).
HsicResult hsic_from_grams(const GramMatrix& gu, const GramMatrix& gv);

/// HSIC test with Gaussian kernels and median-heuristic bandwidths.
/// Throws ConstantInput when either vector is constant.
HsicResult hsic_test(const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v,
                     const HsicOptions& opts = {});

/// Fisher combination; p-values below 1e-300 are clamped before the log.
/// Throws EmptyInput when the list is empty.
FisherCombination fisher_combine(const std::vector<double>& p_values);

/// Per-component detail of a combined independence test.
struct FisherIndependence {
  double p_value = 1.0;
  std::vector<double> component_p_values;  // one per row of `others`
  int constant_rows = 0;                   // rows treated as independent (p = 1)
};

/// HSIC of `target` against every row of `others`, Fisher-combined.
/// Rows raising ConstantInput contribute p = 1; `warn` (when set) receives
/// one message per such row.
FisherIndependence fisher_independence(
    const Eigen::Ref<const Eigen::VectorXd>& target,
    const Eigen::Ref<const Eigen::MatrixXd>& others,
    const HsicOptions& opts = {},
    const std::function<void(const std::string&)>& warn = nullptr);

/// Applies the deterministic stride cap to a sample index range.
std::vector<int> capped_indices(int n, const std::optional<int>& cap);

}  // namespace parcelingam
