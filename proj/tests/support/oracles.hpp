#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace test_oracles {

// Closed-form chi-square survival for even degrees of freedom 2c:
// S(x) = exp(-x/2) * sum_{k<c} (x/2)^k / k!
inline double chi2_survival_even_df(double x, int df) {
  const int c = df / 2;
  const double half = x / 2.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < c; ++k) {
    term *= half / k;
    sum += term;
  }
  return std::exp(-half) * sum;
}

// Self-contained permutation test for HSIC with Gaussian kernels and the
// median-of-absolute-differences bandwidth. Builds its own Gram matrices.
inline double permutation_hsic_oracle(const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& v, int permutations,
                                      std::uint64_t seed) {
  const int n = static_cast<int>(u.size());

  auto bandwidth = [&](const Eigen::VectorXd& w) {
    std::vector<double> diffs;
    diffs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) diffs.push_back(std::abs(w[i] - w[j]));
    std::sort(diffs.begin(), diffs.end());
    const size_t m = diffs.size();
    const double med =
        m % 2 == 1 ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
    return med > 0.0 ? med : 1.0;
  };

  auto centered_gram = [&](const Eigen::VectorXd& w) {
    const double bw = bandwidth(w);
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double d = w[i] - w[j];
        k(i, j) = std::exp(-d * d / (2.0 * bw * bw));
      }
    const Eigen::MatrixXd h =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    return Eigen::MatrixXd(h * k * h);
  };

  const Eigen::MatrixXd kc = centered_gram(u);
  const Eigen::MatrixXd lc = centered_gram(v);
  const double observed = (kc.array() * lc.array()).sum() / n;

  std::mt19937_64 rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    for (int i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(perm[i], perm[pick(rng)]);
    }
    double stat = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) stat += kc(i, j) * lc(perm[i], perm[j]);
    stat /= n;
    if (stat >= observed) ++at_least;
  }
  return static_cast<double>(at_least + 1) / (permutations + 1);
}

// Least-squares coefficients through explicit normal equations; used as the
// independent check of the QR-based solver.
inline Eigen::VectorXd normal_equation_solve(const Eigen::MatrixXd& regressors,
                                             const Eigen::VectorXd& y) {
  const Eigen::MatrixXd gram = regressors * regressors.transpose();
  return gram.ldlt().solve(regressors * y);
}

}  // namespace test_oracles
