#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parcelingam/data_matrix.hpp"
#include "parcelingam/independence.hpp"
#include "parcelingam/ordering.hpp"

namespace parcelingam {

enum class StopReason {
  AllOrdered,
  IndependenceRejectedTopDown,
  IndependenceRejectedBottomUp,
  FewerThanThreeRemain,
};

const char* to_string(StopReason reason);

/// Evidence recorded while the hybrid search ran: for every appended
/// variable, the HSIC p-values of the tests that selected it. These feed the
/// plausibility statistic.
struct Algorithm1Trace {
  OrderedLists lists;
  // id -> p-values against the variables still unordered when it was chosen,
  // in ascending id order. The auto-appended last head has an empty list.
  std::map<int, std::vector<double>> head_p_values;
  std::map<int, std::vector<double>> tail_p_values;
  StopReason stop_reason = StopReason::AllOrdered;
  std::vector<std::string> warnings;
};

struct DiscoveryOptions {
  std::optional<int> hsic_sample_cap;
  int subset_cap = 15;
  int threads = 1;  // worker threads for subset enumeration; 0 = hardware
};

struct Algorithm1Result {
  OrderedLists lists;
  CausalOrderingMatrix ordering;
  Algorithm1Trace trace;
};

struct Algorithm2Result {
  CausalOrderingMatrix ordering;
  std::vector<PlausibilityRecord> records;  // sizes descending, lexicographic
};

/// Full pipeline output: the merged ordering matrix, connection strengths for
/// rows whose order against every other variable is known, the subset
/// records (empty when the subset stage was skipped), and the whole-set trace.
struct DiscoveryResult {
  CausalOrderingMatrix ordering;
  std::map<std::pair<int, int>, double> strengths;  // (i,j) -> b_ij
  std::vector<PlausibilityRecord> subset_records;
  Algorithm1Trace trace;
};

/// Hybrid top-down/bottom-up search for causal orders of variables that are
/// not affected by latent confounders.
Algorithm1Result algorithm1(const DataMatrix& x, double alpha,
                            const DiscoveryOptions& opts = {});

/// Fisher-combined p-value of all independence evidence in a completed trace;
/// 0 when nothing was ordered. Higher is more plausible.
double plausibility(const Algorithm1Trace& trace);

/// Runs the hybrid search on every subset of size >= 2, scores each run's
/// plausibility, and merges the resulting ordering matrices by rank.
/// Throws SubsetBudgetExceeded when d exceeds opts.subset_cap.
Algorithm2Result algorithm2(const DataMatrix& x, double alpha,
                            const DiscoveryOptions& opts = {});

/// The full estimator: whole-set hybrid search, subset enumeration over the
/// unresolved remainder (after the discovered heads are regressed out), and
/// connection-strength estimation for fully ordered rows.
DiscoveryResult algorithm3(const DataMatrix& x, double alpha,
                           const DiscoveryOptions& opts = {});

}  // namespace parcelingam
