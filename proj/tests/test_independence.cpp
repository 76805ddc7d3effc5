#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "parcelingam/independence.hpp"
#include "parcelingam/simgen.hpp"
#include "support/oracles.hpp"

using namespace parcelingam;

namespace {

Eigen::VectorXd normals(int n, std::uint64_t seed) {
  NoiseRng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("hsic detects perfect dependence (u = v)") {
  const Eigen::VectorXd u = normals(200, 1);
  const HsicResult res = hsic_test(u, u);
  CHECK(res.p_value < 0.01);
  CHECK(res.statistic >= 0.0);
  // the permutation oracle agrees that this must be rejected
  const double oracle = test_oracles::permutation_hsic_oracle(u, u, 1000, 17);
  CHECK(oracle < 0.01);
}

TEST_CASE("hsic detects nonlinear dependence (v = u^2, zero correlation)") {
  const Eigen::VectorXd u = normals(500, 2);
  const Eigen::VectorXd v = u.array().square();
  const HsicResult res = hsic_test(u, v);
  CHECK(res.p_value < 0.01);
  const double oracle = test_oracles::permutation_hsic_oracle(u, v, 1000, 18);
  CHECK(oracle < 0.01);
}

TEST_CASE("hsic symmetry and shift invariance") {
  const Eigen::VectorXd u = normals(80, 3);
  const Eigen::VectorXd v = normals(80, 4);

  const HsicResult uv = hsic_test(u, v);
  const HsicResult vu = hsic_test(v, u);
  CHECK(uv.statistic == doctest::Approx(vu.statistic).epsilon(1e-10));

  const Eigen::VectorXd shifted = u.array() + 123.456;
  const HsicResult sv = hsic_test(shifted, v);
  CHECK(sv.statistic == doctest::Approx(uv.statistic).epsilon(1e-10));
}

TEST_CASE("hsic determinism and edge cases") {
  const Eigen::VectorXd u = normals(60, 5);
  const Eigen::VectorXd v = normals(60, 6);
  const HsicResult a = hsic_test(u, v);
  const HsicResult b = hsic_test(u, v);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(60, 3.0);
  CHECK_THROWS_AS(hsic_test(u, constant), ConstantInput);
  CHECK_THROWS_AS(hsic_test(constant, v), ConstantInput);

  // the sample cap subsamples deterministically
  HsicOptions opts;
  opts.sample_cap = 30;
  const HsicResult capped = hsic_test(u, v, opts);
  CHECK(capped.n == 30);
  const HsicResult capped2 = hsic_test(u, v, opts);
  CHECK(capped.p_value == capped2.p_value);
}

TEST_CASE("median heuristic with zero median falls back to 1") {
  Eigen::VectorXd u(12);
  // mostly duplicates: pairwise differences have median 0
  u << 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2;
  CHECK(median_heuristic_bandwidth(u) == doctest::Approx(1.0));
}

TEST_CASE("fisher_combine golden values") {
  SUBCASE("no-evidence case") {
    const FisherCombination f = fisher_combine({1.0, 1.0, 1.0});
    CHECK(f.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.p_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.degrees_of_freedom == 6);
  }

  SUBCASE("two p-values of 0.5 against the chi-square(4) closed form") {
    const FisherCombination f = fisher_combine({0.5, 0.5});
    CHECK(f.statistic == doctest::Approx(2.77259).epsilon(1e-5));
    const double oracle = test_oracles::chi2_survival_even_df(f.statistic, 4);
    CHECK(f.p_value == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(f.p_value == doctest::Approx(0.59665).epsilon(2e-4));
  }

  SUBCASE("single component is the identity") {
    const FisherCombination f = fisher_combine({0.01});
    CHECK(f.statistic == doctest::Approx(9.21034).epsilon(1e-5));
    CHECK(f.p_value == doctest::Approx(0.01).epsilon(1e-6));
  }

  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(fisher_combine({}), EmptyInput);
  }

  SUBCASE("tiny p-values are clamped, not -inf") {
    const FisherCombination f = fisher_combine({1e-320, 0.5});
    CHECK(std::isfinite(f.statistic));
    CHECK(f.p_value >= 0.0);
  }
}

TEST_CASE("fisher statistic matches the analytic survival on random vectors") {
  NoiseRng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 1 + static_cast<int>(rng.next_u64() % 6);
    std::vector<double> ps(c);
    for (double& p : ps) p = rng.uniform();
    const FisherCombination f = fisher_combine(ps);
    const double oracle = test_oracles::chi2_survival_even_df(f.statistic, 2 * c);
    CHECK(std::abs(f.p_value - oracle) < 1e-8);
  }
}

TEST_CASE("fisher monotonicity and permutation invariance") {
  const std::vector<double> base = {0.3, 0.7, 0.9};
  const FisherCombination f1 = fisher_combine(base);
  const FisherCombination f2 = fisher_combine({0.9, 0.3, 0.7});
  CHECK(f1.statistic == doctest::Approx(f2.statistic).epsilon(1e-12));
  CHECK(f1.p_value == doctest::Approx(f2.p_value).epsilon(1e-12));

  const FisherCombination f3 = fisher_combine({0.1, 0.7, 0.9});
  CHECK(f3.statistic > f1.statistic);
  CHECK(f3.p_value <= f1.p_value);
}

TEST_CASE("fisher_independence combines across rows") {
  const Eigen::VectorXd target = normals(200, 10);

  SUBCASE("single row reduces to that row's HSIC p-value") {
    const Eigen::VectorXd other = normals(200, 11);
    Eigen::MatrixXd rows(1, 200);
    rows.row(0) = other;
    const FisherIndependence combined = fisher_independence(target, rows);
    const HsicResult single = hsic_test(target, other);
    CHECK(combined.p_value == doctest::Approx(single.p_value).epsilon(1e-12));
  }

  SUBCASE("target duplicated as every row is detected") {
    Eigen::MatrixXd rows(3, 200);
    for (int r = 0; r < 3; ++r) rows.row(r) = target;
    const FisherIndependence combined = fisher_independence(target, rows);
    CHECK(combined.p_value < 0.01);
  }

  SUBCASE("all-constant rows give the vacuous p = 1") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Constant(2, 200, 5.0);
    int warnings = 0;
    const FisherIndependence combined = fisher_independence(
        target, rows, {}, [&](const std::string&) { ++warnings; });
    CHECK(combined.p_value == doctest::Approx(1.0));
    CHECK(combined.constant_rows == 2);
    CHECK(warnings == 2);
  }
}

TEST_CASE("quick calibration sanity at n = 100" * doctest::timeout(120)) {
  // The full 500-rep calibration at n in {100, 500} runs in the acceptance
  // suite; this is a fast regression guard.
  const int reps = 150;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const Eigen::VectorXd u = normals(100, 1000 + 2 * rep);
    const Eigen::VectorXd v = normals(100, 1001 + 2 * rep);
    if (hsic_test(u, v).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  CHECK(rate >= 0.0);
  CHECK(rate <= 0.12);  // loose guard; the acceptance suite pins [0.02, 0.09]
}
