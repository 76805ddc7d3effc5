#include "parcelingam/core_stats.hpp"

#include <Eigen/QR>
#include <stdexcept>

namespace parcelingam {

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = x.size();
  if (n < 2) throw std::invalid_argument("variance needs n >= 2");
  return x.squaredNorm() / static_cast<double>(n - 1);
}

double sample_covariance(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("covariance length mismatch");
  if (x.size() < 2) throw std::invalid_argument("covariance needs n >= 2");
  return x.dot(y) / static_cast<double>(x.size() - 1);
}

Eigen::VectorXd simple_residual(const Eigen::Ref<const Eigen::VectorXd>& x_i,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j) {
  if (x_i.size() != x_j.size()) throw std::invalid_argument("residual length mismatch");
  if (x_i.size() < 3) throw std::invalid_argument("residual needs n >= 3");
  const double var_j = sample_variance(x_j);
  if (var_j <= kDegenerateVariance)
    throw DegenerateVariance("regressor variance below degeneracy floor");
  const double cov = sample_covariance(x_i, x_j);
  return x_i - (cov / var_j) * x_j;
}

Eigen::VectorXd regression_coefficients(
    const Eigen::Ref<const Eigen::VectorXd>& y,
    const Eigen::Ref<const Eigen::MatrixXd>& regressors) {
  const auto k = regressors.rows();
  const auto n = regressors.cols();
  if (k < 1) throw std::invalid_argument("regression needs at least one regressor");
  if (y.size() != n) throw std::invalid_argument("regression length mismatch");
  if (n <= k) throw std::invalid_argument("regression needs n > number of regressors");

  // Gate on the covariance condition number before solving.
  const Eigen::MatrixXd sigma =
      regressors * regressors.transpose() / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo >= kMaxConditionNumber)
    throw SingularCovariance("regressor covariance fails the condition-number gate");

  // Orthogonal decomposition of the design matrix, not an inversion of sigma.
  return regressors.transpose().colPivHouseholderQr().solve(y);
}

Eigen::VectorXd multiple_residual(const Eigen::Ref<const Eigen::VectorXd>& x_j,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x_rest) {
  const Eigen::VectorXd beta = regression_coefficients(x_j, x_rest);
  return x_j - x_rest.transpose() * beta;
}

}  // namespace parcelingam
