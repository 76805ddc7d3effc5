#include "parcelingam/independence.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "parcelingam/core_stats.hpp"

namespace parcelingam {

namespace {

constexpr double kPClampFloor = 1e-300;

Eigen::VectorXd gather(const Eigen::Ref<const Eigen::VectorXd>& v,
                       const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<int>(idx.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = v[idx[i]];
  return out;
}

}  // namespace

std::vector<int> capped_indices(int n, const std::optional<int>& cap) {
  if (!cap || n <= *cap) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  const int m = *cap;
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i)
    idx[i] = static_cast<int>((static_cast<long long>(i) * n) / m);
  return idx;
}

double median_heuristic_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> diffs;
  diffs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) diffs.push_back(std::abs(u[i] - u[j]));
  const size_t m = diffs.size();
  double median;
  if (m % 2 == 1) {
    std::nth_element(diffs.begin(), diffs.begin() + m / 2, diffs.end());
    median = diffs[m / 2];
  } else {
    std::nth_element(diffs.begin(), diffs.begin() + m / 2, diffs.end());
    const double upper = diffs[m / 2];
    std::nth_element(diffs.begin(), diffs.begin() + m / 2 - 1, diffs.begin() + m / 2);
    median = 0.5 * (diffs[m / 2 - 1] + upper);
  }
  return median > 0.0 ? median : 1.0;
}

GramMatrix compute_gram(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const int n = static_cast<int>(u.size());
  if (n < 10) throw std::invalid_argument("hsic needs n >= 10");
  if (!u.allFinite()) throw std::invalid_argument("hsic input has non-finite entries");
  const Eigen::VectorXd centered_u = u.array() - u.mean();
  if (sample_variance(centered_u) <= kDegenerateVariance)
    throw ConstantInput("constant input to independence test");

  GramMatrix g;
  g.n = n;
  g.bandwidth = median_heuristic_bandwidth(u);
  const double inv = -1.0 / (2.0 * g.bandwidth * g.bandwidth);

  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j) {
    const double uj = u[j];
    for (int i = 0; i < n; ++i) {
      const double d = u[i] - uj;
      k(i, j) = d * d * inv;
    }
  }
  k = k.array().exp();

  g.mean_offdiag = (k.sum() - k.trace()) / (static_cast<double>(n) * (n - 1));

  // Double centering via rank-one updates: Kc = K - rowmean - colmean + mean.
  const Eigen::VectorXd row_mean = k.rowwise().mean();
  const double total_mean = row_mean.mean();
  k.colwise() -= row_mean;
  k.rowwise() -= row_mean.transpose();
  k.array() += total_mean;
  g.centered = std::move(k);
  return g;
}

HsicResult hsic_from_grams(const GramMatrix& gu, const GramMatrix& gv) {
  if (gu.n != gv.n) throw std::invalid_argument("gram size mismatch");
  const double n = gu.n;

  const Eigen::ArrayXXd prod = gu.centered.array() * gv.centered.array();
  HsicResult result;
  result.n = gu.n;
  result.bandwidth_u = gu.bandwidth;
  result.bandwidth_v = gv.bandwidth;
  result.statistic = prod.sum() / n;

  // Two-moment gamma fit of the null distribution of the n-scaled statistic.
  const double mu_x = gu.mean_offdiag;
  const double mu_y = gv.mean_offdiag;
  const double mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / n;

  const Eigen::ArrayXXd sq = (prod / 6.0).square();
  double var = (sq.sum() - sq.matrix().trace()) / (n * (n - 1.0));
  var *= 72.0 * (n - 4.0) * (n - 5.0) / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));

  if (!(mean > 0.0) || !(var > 0.0)) {
    result.p_value = 1.0;
    return result;
  }
  const double shape = mean * mean / var;
  const double scale = n * var / mean;
  result.p_value = boost::math::gamma_q(shape, std::max(result.statistic, 0.0) / scale);
  return result;
}

HsicResult hsic_test(const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v,
                     const HsicOptions& opts) {
  if (u.size() != v.size()) throw std::invalid_argument("hsic length mismatch");
  const auto idx = capped_indices(static_cast<int>(u.size()), opts.sample_cap);
  if (static_cast<int>(idx.size()) == u.size())
    return hsic_from_grams(compute_gram(u), compute_gram(v));
  const Eigen::VectorXd uc = gather(u, idx);
  const Eigen::VectorXd vc = gather(v, idx);
  return hsic_from_grams(compute_gram(uc), compute_gram(vc));
}

FisherCombination fisher_combine(const std::vector<double>& p_values) {
  if (p_values.empty()) throw EmptyInput("fisher_combine needs at least one p-value");
  FisherCombination out;
  out.component_p_values = p_values;
  double log_sum = 0.0;
  for (double p : p_values) {
    const double clamped = std::clamp(p, kPClampFloor, 1.0);
    log_sum += std::log(clamped);
  }
  out.statistic = -2.0 * log_sum;
  const int c = static_cast<int>(p_values.size());
  out.degrees_of_freedom = 2 * c;
  // chi-square(2c) survival is the regularized upper incomplete gamma Q(c, x/2)
  out.p_value = boost::math::gamma_q(static_cast<double>(c), out.statistic / 2.0);
  return out;
}

FisherIndependence fisher_independence(
    const Eigen::Ref<const Eigen::VectorXd>& target,
    const Eigen::Ref<const Eigen::MatrixXd>& others,
    const HsicOptions& opts,
    const std::function<void(const std::string&)>& warn) {
  if (others.rows() < 1)
    throw std::invalid_argument("fisher_independence needs at least one row");
  if (others.cols() != target.size())
    throw std::invalid_argument("fisher_independence length mismatch");

  const auto idx = capped_indices(static_cast<int>(target.size()), opts.sample_cap);
  const bool capped = static_cast<int>(idx.size()) != target.size();
  const Eigen::VectorXd tc = capped ? gather(target, idx) : Eigen::VectorXd(target);

  FisherIndependence out;
  GramMatrix target_gram;
  bool target_constant = false;
  try {
    target_gram = compute_gram(tc);
  } catch (const ConstantInput&) {
    target_constant = true;
  }

  for (int r = 0; r < others.rows(); ++r) {
    double p = 1.0;
    if (target_constant) {
      ++out.constant_rows;
      if (warn) warn("constant target treated as independent of row " + std::to_string(r));
    } else {
      try {
        const Eigen::VectorXd row =
            capped ? gather(others.row(r).transpose(), idx)
                   : Eigen::VectorXd(others.row(r).transpose());
        p = hsic_from_grams(target_gram, compute_gram(row)).p_value;
      } catch (const ConstantInput&) {
        ++out.constant_rows;
        if (warn) warn("constant row " + std::to_string(r) + " treated as independent");
      }
    }
    out.component_p_values.push_back(p);
  }
  out.p_value = fisher_combine(out.component_p_values).p_value;
  return out;
}

}  // namespace parcelingam
