#include "parcelingam/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "parcelingam/core_stats.hpp"
#include "parcelingam/evaluation.hpp"

namespace parcelingam::bench {

namespace {

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

void run_parallel(int count, int threads, const std::function<void(int)>& body) {
  threads = threads > 0 ? threads
                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CellResult run_cell(const CellConfig& config) {
  CellResult result;
  result.n = config.n;
  result.trials = config.trials;

  struct TrialOutcome {
    ScoreReport plain;
    ScoreReport excl;
    std::optional<double> rmse;
    double seconds = 0.0;
  };
  std::vector<TrialOutcome> outcomes(config.trials);

  // Trials run in parallel; each algorithm3 call stays single-threaded so the
  // schedule cannot affect any per-trial result.
  DiscoveryOptions trial_opts = config.discovery;
  trial_opts.threads = 1;

  run_parallel(config.trials, config.discovery.threads, [&](int t) {
    BuiltinParams params;
    params.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    const SemSpec spec = builtin_network(config.network, params);
    const GeneratedData gen = generate(spec, config.n);

    const auto t0 = std::chrono::steady_clock::now();
    const DiscoveryResult res = algorithm3(center(gen.data), config.alpha, trial_opts);
    const auto t1 = std::chrono::steady_clock::now();

    TrialOutcome out;
    out.seconds = std::chrono::duration<double>(t1 - t0).count();
    out.plain = score_ordering(res.ordering, gen.truth, false);
    out.excl = score_ordering(res.ordering, gen.truth, true);
    out.rmse = score_strengths(res.strengths, gen.truth).rmse;
    outcomes[t] = std::move(out);
  });

  {
    BuiltinParams params;
    params.seed = derive_seed(config.seed, 0);
    const SemSpec spec = builtin_network(config.network, params);
    result.network = spec.name;
    result.dim = spec.d;
    result.max_recall = max_recall(spec).max_recall;
  }

  std::vector<double> precision, recall, f, precision_x, recall_x, f_x, rmse, secs;
  for (const auto& out : outcomes) {
    if (out.plain.precision) precision.push_back(*out.plain.precision);
    recall.push_back(out.plain.recall);
    f.push_back(out.plain.f_measure);
    if (out.excl.precision) precision_x.push_back(*out.excl.precision);
    recall_x.push_back(out.excl.recall);
    f_x.push_back(out.excl.f_measure);
    if (out.rmse) rmse.push_back(*out.rmse);
    secs.push_back(out.seconds);
  }
  if (!precision.empty()) result.precision = mean_of(precision);
  result.recall = mean_of(recall);
  result.f_measure = mean_of(f);
  if (!precision_x.empty()) result.precision_excl = mean_of(precision_x);
  result.recall_excl = mean_of(recall_x);
  result.f_measure_excl = mean_of(f_x);
  if (!rmse.empty()) result.rmse = mean_of(rmse);
  result.trials_with_strengths = static_cast<int>(rmse.size());
  result.seconds_per_trial = mean_of(secs);
  return result;
}

std::string cell_csv_header() {
  return "network,dim,n,trials,precision,recall,f_measure,"
         "precision_excl_path_free,recall_excl_path_free,f_measure_excl_path_free,"
         "max_recall,rmse,trials_with_strengths,seconds_per_trial";
}

namespace {

std::string opt_str(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(6);
  out << *v;
  return out.str();
}

}  // namespace

std::string cell_csv_row(const CellResult& r) {
  std::ostringstream out;
  out.precision(6);
  out << r.network << "," << r.dim << "," << r.n << "," << r.trials << ","
      << opt_str(r.precision) << "," << r.recall << "," << r.f_measure << ","
      << opt_str(r.precision_excl) << "," << r.recall_excl << ","
      << r.f_measure_excl << "," << r.max_recall << "," << opt_str(r.rmse) << ","
      << r.trials_with_strengths << "," << r.seconds_per_trial;
  return out.str();
}

double permutation_hsic_p_value(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                int permutations, std::uint64_t seed) {
  const GramMatrix gu = compute_gram(u);
  const GramMatrix gv = compute_gram(v);
  const int n = gu.n;
  const double observed = hsic_from_grams(gu, gv).statistic;

  NoiseRng rng(seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::MatrixXd shuffled(n, n);

  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    // Centered Gram of the permuted sample is the permuted centered Gram.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) shuffled(i, j) = gv.centered(perm[i], perm[j]);
    const double stat = (gu.centered.array() * shuffled.array()).sum() / n;
    if (stat >= observed) ++at_least;
  }
  return static_cast<double>(at_least + 1) / (permutations + 1);
}

LemmaCalibrationResult run_lemma_calibration(const LemmaCalibrationConfig& config) {
  LemmaCalibrationResult result;

  // Fixed confounder-free DAG with a unique source (x1) and unique sink (x4);
  // weights vary per trial.
  const int d = 4;
  std::vector<std::vector<int>> exo_pass(d, std::vector<int>(config.lemma_trials, 0));
  std::vector<std::vector<int>> sink_pass(d, std::vector<int>(config.lemma_trials, 0));

  run_parallel(config.lemma_trials, config.threads, [&](int t) {
    SemSpec spec;
    spec.d = d;
    spec.q = 0;
    spec.B = Eigen::MatrixXd::Zero(d, d);
    spec.Lambda = Eigen::MatrixXd::Zero(d, 0);
    spec.e_families = {NoiseFamily::GaussMixAsym, NoiseFamily::Laplace,
                       NoiseFamily::GaussMixSym, NoiseFamily::GaussMixAsym};
    spec.seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(t));
    spec.name = "lemma_dag";
    NoiseRng weight_rng(derive_seed(spec.seed, 2));
    auto weight = [&] {
      const double mag = 0.5 + weight_rng.uniform();
      return weight_rng.uniform() < 0.5 ? -mag : mag;
    };
    spec.B(1, 0) = weight();
    spec.B(2, 0) = weight();
    spec.B(2, 1) = weight();
    spec.B(3, 1) = weight();
    spec.B(3, 2) = weight();

    const GeneratedData gen = generate(spec, config.lemma_n);
    const DataMatrix x = center(gen.data);

    for (int pos = 0; pos < d; ++pos) {
      const int original = gen.truth.permutation[pos] - 1;

      // Lemma-1 style test: x_j against its simple-regression residuals.
      Eigen::MatrixXd residuals(d - 1, x.n());
      bool degenerate = false;
      int r = 0;
      for (int i = 0; i < d; ++i) {
        if (i == pos) continue;
        try {
          residuals.row(r++) = simple_residual(x.values.row(i), x.values.row(pos));
        } catch (const DegenerateVariance&) {
          degenerate = true;
          break;
        }
      }
      if (!degenerate) {
        const double p = fisher_independence(x.values.row(pos), residuals).p_value;
        if (p > config.alpha) exo_pass[original][t] = 1;
      }

      // Lemma-2 style test: the multiple-regression residual against the rest.
      Eigen::MatrixXd rest(d - 1, x.n());
      r = 0;
      for (int i = 0; i < d; ++i)
        if (i != pos) rest.row(r++) = x.values.row(i);
      try {
        const Eigen::VectorXd residual =
            multiple_residual(x.values.row(pos).transpose(), rest);
        const double p = fisher_independence(residual, rest).p_value;
        if (p > config.alpha) sink_pass[original][t] = 1;
      } catch (const Error&) {
      }
    }
  });

  auto rate = [&](const std::vector<int>& hits) {
    return std::accumulate(hits.begin(), hits.end(), 0) /
           static_cast<double>(config.lemma_trials);
  };
  result.exogenous_pass_rate = {rate(exo_pass[0])};
  for (int i = 1; i < d; ++i)
    result.nonexogenous_reject_rate.push_back(1.0 - rate(exo_pass[i]));
  result.sink_pass_rate = {rate(sink_pass[d - 1])};
  for (int i = 0; i < d - 1; ++i)
    result.nonsink_reject_rate.push_back(1.0 - rate(sink_pass[i]));

  // Gamma-null calibration on independent standard normals.
  for (int n : config.calibration_ns) {
    std::vector<int> reject(config.calibration_reps, 0);
    std::vector<int> reject_perm(config.oracle_instances, 0);
    std::vector<int> reject_gamma_shared(config.oracle_instances, 0);

    run_parallel(config.calibration_reps, config.threads, [&](int rep) {
      NoiseRng rng(derive_seed(config.seed, 7000 + 131 * n + rep));
      Eigen::VectorXd u(n), v(n);
      for (int i = 0; i < n; ++i) u[i] = rng.normal();
      for (int i = 0; i < n; ++i) v[i] = rng.normal();
      const double p = hsic_test(u, v).p_value;
      if (p < config.alpha) reject[rep] = 1;
      if (rep < config.oracle_instances) {
        if (p < config.alpha) reject_gamma_shared[rep] = 1;
        const double pp = permutation_hsic_p_value(
            u, v, config.oracle_permutations,
            derive_seed(config.seed, 9000 + 131 * n + rep));
        if (pp < config.alpha) reject_perm[rep] = 1;
      }
    });

    result.ns.push_back(n);
    result.gamma_fp_rate.push_back(std::accumulate(reject.begin(), reject.end(), 0) /
                                   static_cast<double>(config.calibration_reps));
    result.permutation_fp_rate.push_back(
        std::accumulate(reject_perm.begin(), reject_perm.end(), 0) /
        static_cast<double>(config.oracle_instances));
    result.gamma_fp_rate_shared.push_back(
        std::accumulate(reject_gamma_shared.begin(), reject_gamma_shared.end(), 0) /
        static_cast<double>(config.oracle_instances));
  }
  return result;
}

}  // namespace parcelingam::bench
