#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parcelingam/discovery.hpp"
#include "parcelingam/simgen.hpp"

namespace parcelingam::bench {

struct CellConfig {
  BuiltinNetwork network = BuiltinNetwork::Fig2_5Var;
  int n = 1000;
  int trials = 20;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  DiscoveryOptions discovery;
};

/// One (network, sample size) cell: trial-mean scores in the shape of the
/// artificial-data tables, plus wall-clock per trial.
struct CellResult {
  std::string network;
  int dim = 0;
  int n = 0;
  int trials = 0;
  std::optional<double> precision;          // mean over trials with decided pairs
  double recall = 0.0;                      // mean over trials
  double f_measure = 0.0;
  std::optional<double> precision_excl;     // path-free pairs excluded
  double recall_excl = 0.0;
  double f_measure_excl = 0.0;
  double max_recall = 0.0;                  // population identifiability
  std::optional<double> rmse;               // mean over trials with strengths
  int trials_with_strengths = 0;
  double seconds_per_trial = 0.0;
};

CellResult run_cell(const CellConfig& config);

std::string cell_csv_header();
std::string cell_csv_row(const CellResult& r);

/// Lemma-level statistical checks: exogenous/sink detection rates on
/// confounder-free data, and the calibration of the HSIC gamma null
/// approximation against both the nominal level and a permutation oracle.
struct LemmaCalibrationConfig {
  int lemma_trials = 50;
  int lemma_n = 2000;
  double alpha = 0.05;
  int calibration_reps = 500;
  std::vector<int> calibration_ns = {100, 500};
  int oracle_instances = 50;
  int oracle_permutations = 1000;
  std::uint64_t seed = 7;
  int threads = 1;
};

struct LemmaCalibrationResult {
  // Lemma-style detection rates, one entry per variable of the fixed test DAG.
  std::vector<double> exogenous_pass_rate;   // true exogenous accepted
  std::vector<double> nonexogenous_reject_rate;
  std::vector<double> sink_pass_rate;
  std::vector<double> nonsink_reject_rate;
  // False-positive rate of the gamma approximation per calibration n.
  std::vector<int> ns;
  std::vector<double> gamma_fp_rate;
  std::vector<double> permutation_fp_rate;   // on the shared oracle instances
  std::vector<double> gamma_fp_rate_shared;  // same instances, gamma p-values
};

LemmaCalibrationResult run_lemma_calibration(const LemmaCalibrationConfig& config);

/// Monte-Carlo permutation p-value for the HSIC statistic; the calibration
/// suite compares the production gamma approximation against it.
double permutation_hsic_p_value(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                int permutations, std::uint64_t seed);

}  // namespace parcelingam::bench
