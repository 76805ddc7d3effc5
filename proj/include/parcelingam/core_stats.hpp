#pragma once

#include <Eigen/Dense>

#include "parcelingam/data_matrix.hpp"

namespace parcelingam {

/// Variance floor below which a centered variable counts as constant.
inline constexpr double kDegenerateVariance = 1e-12;

/// Condition-number gate for the regressor covariance matrix.
inline constexpr double kMaxConditionNumber = 1e12;

/// Unbiased sample variance (n-1 denominator) of a centered vector.
double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Unbiased sample covariance of two centered vectors.
double sample_covariance(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y);

/// Residual of x_i after simple least-squares regression on x_j:
/// r = x_i - (cov(x_i,x_j)/var(x_j)) x_j. Inputs must be centered.
/// Throws DegenerateVariance when var(x_j) <= kDegenerateVariance.
Eigen::VectorXd simple_residual(const Eigen::Ref<const Eigen::VectorXd>& x_i,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j);

/// Least-squares coefficients of y regressed on the rows of regressors
/// (k x n), solved by column-pivoted QR. Inputs must be centered.
/// Throws SingularCovariance when the regressor covariance fails the
/// condition-number gate.
Eigen::VectorXd regression_coefficients(
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::MatrixXd>& regressors);

/// Residual of x_j after multiple regression on every row of x_rest.
/// Throws SingularCovariance on collinear regressors.
Eigen::VectorXd multiple_residual(const Eigen::Ref<const Eigen::VectorXd>& x_j,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x_rest);

}  // namespace parcelingam
