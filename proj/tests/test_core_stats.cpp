#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "parcelingam/core_stats.hpp"
#include "parcelingam/simgen.hpp"
#include "support/oracles.hpp"

using namespace parcelingam;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("center subtracts row means") {
  DataMatrix x;
  x.values.resize(2, 3);
  x.values << 1, 2, 3, 5, 5, 5;
  x.variable_ids = {1, 2};

  const DataMatrix c = center(x);
  CHECK(c.values(0, 0) == doctest::Approx(-1.0));
  CHECK(c.values(0, 1) == doctest::Approx(0.0));
  CHECK(c.values(0, 2) == doctest::Approx(1.0));
  // constant row becomes zero
  CHECK(c.values.row(1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // idempotent
  const DataMatrix c2 = center(c);
  CHECK((c2.values - c.values).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < c.d(); ++i) CHECK(std::abs(c.values.row(i).mean()) < 1e-10);
}

TEST_CASE("simple_residual basic identities") {
  const Eigen::VectorXd xj = vec({1, -1, 2, -2});

  SUBCASE("identical input gives zero residual") {
    const Eigen::VectorXd r = simple_residual(xj, xj);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("uncorrelated input passes through unchanged") {
    // constructed orthogonal to xj
    const Eigen::VectorXd xi = vec({1, 1, -1, -1});
    REQUIRE(std::abs(xi.dot(xj)) < 1e-12);
    const Eigen::VectorXd r = simple_residual(xi, xj);
    CHECK((r - xi).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("recovers the additive part exactly on the 4-sample instance") {
    // v centered and chosen in advance; oracle = normal-equation solve
    const Eigen::VectorXd v = vec({0.5, -1.5, 0.5, 0.5});
    const Eigen::VectorXd xi = 2.0 * xj + v;
    Eigen::MatrixXd reg(1, 4);
    reg.row(0) = xj;
    const Eigen::VectorXd beta = test_oracles::normal_equation_solve(reg, xi);
    // the oracle confirms the regression coefficient is not exactly 2 because
    // v is not orthogonal to xj; the residual must match the oracle's
    const Eigen::VectorXd expected = xi - beta[0] * xj;
    const Eigen::VectorXd r = simple_residual(xi, xj);
    CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("exact recovery when the added part is orthogonal") {
    const Eigen::VectorXd v = vec({1, 1, -1, -1});  // orthogonal to xj
    const Eigen::VectorXd xi = 2.0 * xj + v;
    const Eigen::VectorXd r = simple_residual(xi, xj);
    CHECK((r - v).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("degenerate regressor throws") {
    const Eigen::VectorXd constant = vec({0, 0, 0, 0});
    CHECK_THROWS_AS(simple_residual(xj, constant), DegenerateVariance);
  }
}

TEST_CASE("residual orthogonality, linearity, scale invariance") {
  NoiseRng rng(42);
  const int n = 64;
  Eigen::VectorXd xj(n), xi(n), yi(n);
  for (int k = 0; k < n; ++k) {
    xj[k] = rng.normal();
    xi[k] = 0.8 * xj[k] + rng.normal();
    yi[k] = -1.3 * xj[k] + rng.normal();
  }
  xj.array() -= xj.mean();
  xi.array() -= xi.mean();
  yi.array() -= yi.mean();

  const Eigen::VectorXd ri = simple_residual(xi, xj);
  const double orth_bound = 1e-8 * std::sqrt(sample_variance(xj)) *
                            std::sqrt(std::max(sample_variance(ri), 1e-30));
  CHECK(std::abs(sample_covariance(ri, xj)) <= orth_bound + 1e-14);

  SUBCASE("linearity in the regressed variable") {
    const double a = 2.5, b = -0.75;
    const Eigen::VectorXd lhs = simple_residual(a * xi + b * yi, xj);
    const Eigen::VectorXd rhs =
        a * simple_residual(xi, xj) + b * simple_residual(yi, xj);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("scaling the regressor changes nothing") {
    const Eigen::VectorXd scaled = simple_residual(xi, (-3.7 * xj).eval());
    CHECK((scaled - ri).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("multiple_residual identities and oracle agreement") {
  NoiseRng rng(7);
  const int n = 200;

  SUBCASE("regressand inside the span gives zero") {
    Eigen::MatrixXd rest(2, 12);
    Eigen::VectorXd xj(12);
    NoiseRng local(3);
    for (int k = 0; k < 12; ++k) {
      rest(0, k) = local.normal();
      rest(1, k) = local.normal();
    }
    rest.row(0).array() -= rest.row(0).mean();
    rest.row(1).array() -= rest.row(1).mean();
    xj = rest.row(0);
    const Eigen::VectorXd r = multiple_residual(xj, rest);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("uncorrelated regressors pass the target through") {
    Eigen::VectorXd xj = vec({2, -2, 1, -1, 0, 0});
    Eigen::MatrixXd rest(1, 6);
    rest << 1, 1, 0, 0, -1, -1;  // orthogonal to xj
    REQUIRE(std::abs((rest.row(0) * xj)(0)) < 1e-12);
    const Eigen::VectorXd r = multiple_residual(xj, rest);
    CHECK((r - xj).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("3-variable chain residual is orthogonal to both regressors") {
    // x1 -> x2 -> x3 with uniform-ish noise
    Eigen::MatrixXd x(3, n);
    for (int k = 0; k < n; ++k) {
      x(0, k) = 2.0 * rng.uniform() - 1.0;
      x(1, k) = 1.2 * x(0, k) + (2.0 * rng.uniform() - 1.0);
      x(2, k) = -0.9 * x(1, k) + (2.0 * rng.uniform() - 1.0);
    }
    for (int i = 0; i < 3; ++i) x.row(i).array() -= x.row(i).mean();

    const Eigen::VectorXd r = multiple_residual(x.row(2), x.topRows(2));
    for (int i = 0; i < 2; ++i) {
      const double bound = 1e-8 * std::sqrt(sample_variance(x.row(i))) *
                           std::sqrt(sample_variance(r));
      CHECK(std::abs(sample_covariance(r, x.row(i))) <= bound + 1e-14);
    }

    // QR-based solve must match the explicit normal-equation oracle
    const Eigen::VectorXd beta_qr = regression_coefficients(x.row(2), x.topRows(2));
    const Eigen::VectorXd beta_ne =
        test_oracles::normal_equation_solve(x.topRows(2), x.row(2));
    CHECK((beta_qr - beta_ne).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("collinear regressors throw SingularCovariance") {
    Eigen::MatrixXd rest(2, 8);
    NoiseRng local(9);
    for (int k = 0; k < 8; ++k) rest(0, k) = local.normal();
    rest.row(0).array() -= rest.row(0).mean();
    rest.row(1) = 2.0 * rest.row(0);
    Eigen::VectorXd xj(8);
    for (int k = 0; k < 8; ++k) xj[k] = local.normal();
    xj.array() -= xj.mean();
    CHECK_THROWS_AS(multiple_residual(xj, rest), SingularCovariance);
  }
}

TEST_CASE("DataMatrix validation and subsetting") {
  DataMatrix x;
  x.values.resize(3, 5);
  NoiseRng rng(11);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) x.values(i, j) = rng.normal();
  x.variable_ids = {10, 20, 30};
  CHECK_NOTHROW(x.validate());

  const DataMatrix sub = x.subset({30, 10});
  CHECK(sub.variable_ids == std::vector<int>{30, 10});
  CHECK((sub.values.row(0) - x.values.row(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sub.values.row(1) - x.values.row(0)).cwiseAbs().maxCoeff() == 0.0);

  DataMatrix bad = x;
  bad.variable_ids = {1, 1, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
