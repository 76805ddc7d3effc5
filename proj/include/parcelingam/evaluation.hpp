#pragma once

#include <map>
#include <optional>
#include <utility>

#include "parcelingam/ordering.hpp"
#include "parcelingam/simgen.hpp"

namespace parcelingam {

/// Pairwise scoring of an estimated ordering against ground truth.
struct ScoreReport {
  std::optional<double> precision;  // undefined when nothing was decided
  double recall = 0.0;
  double f_measure = 0.0;
  int decided_pairs = 0;
  int correct_pairs = 0;
  int total_true_pairs = 0;
  int excluded_pairs = 0;  // path-free exclusions when the flag is set
  std::optional<double> rmse;
  int strength_count = 0;
};

/// Precision = correct/decided, recall = correct/total, F = 2PR/(P+R)
/// (0 when recall is 0). With exclude_path_free, pairs that have no directed
/// path in either direction are removed from all counts.
/// Throws IdMismatch when the id sets differ.
ScoreReport score_ordering(const CausalOrderingMatrix& est,
                           const SemGroundTruth& truth,
                           bool exclude_path_free = false);

struct StrengthScore {
  std::optional<double> rmse;  // undefined when est is empty
  int count = 0;
};

/// RMSE of the provided strengths against true_B (0 where no edge).
StrengthScore score_strengths(const std::map<std::pair<int, int>, double>& est,
                              const SemGroundTruth& truth);

/// Population-level identifiability of a generator spec: which pairs the
/// full pipeline can order with infinite data and no statistical errors.
/// Decisions come from a noise-free mirror of the estimator that replaces
/// every independence test with an exact shared-source check on the model's
/// mixing coefficients, branching over every admissible selection.
struct MaxRecallReport {
  int identifiable_pairs = 0;
  int total_pairs = 0;
  double max_recall = 0.0;
  CausalOrderingMatrix decisions;  // consistent population decisions; 0 = unknown
  bool conflicts = false;          // some pair got contradictory decisions
};

MaxRecallReport max_recall(const SemSpec& spec);

}  // namespace parcelingam
