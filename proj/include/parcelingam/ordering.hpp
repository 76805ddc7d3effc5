#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "parcelingam/errors.hpp"

namespace parcelingam {

/// Pairwise causal-order knowledge over d variables. entries(i,j) is -1 when
/// variable i is ordered before j, +1 when after, 0 when unknown. The
/// diagonal is 0 and entries(i,j) == -entries(j,i) wherever known.
class CausalOrderingMatrix {
 public:
  CausalOrderingMatrix() = default;
  explicit CausalOrderingMatrix(std::vector<int> ids);

  int d() const { return static_cast<int>(ids_.size()); }
  const std::vector<int>& variable_ids() const { return ids_; }
  const Eigen::MatrixXi& entries() const { return entries_; }

  int at(int row, int col) const { return entries_(row, col); }
  int at_ids(int id_i, int id_j) const;

  /// Sets the (i, j) entry and its antisymmetric mirror. value in {-1,0,+1}.
  void set_pair(int row, int col, int value);
  void set_pair_ids(int id_i, int id_j, int value);

  int position_of(int id) const;
  bool operator==(const CausalOrderingMatrix& other) const;

  std::string to_csv() const;

 private:
  std::vector<int> ids_;
  Eigen::MatrixXi entries_;
};

/// K_head / K_tail index sequences produced by the hybrid search.
struct OrderedLists {
  std::vector<int> k_head;  // top-down discoveries, first found first
  std::vector<int> k_tail;  // bottom-up discoveries, earliest order first
};

/// One subset run: the subset analyzed, its estimated ordering, and the
/// Fisher-combined plausibility of the independence evidence behind it.
struct PlausibilityRecord {
  std::vector<int> subset;  // sorted variable ids
  CausalOrderingMatrix ordering;
  double p_value = 0.0;
  double component_log_p_sum = 0.0;  // sum of log p_i, for audit
};

/// Ordering matrix implied by K_head / K_tail over all_ids: listed variables
/// are ordered against everything, unlisted pairs stay unknown.
/// Throws OverlappingLists when the lists intersect.
CausalOrderingMatrix build_ordering_matrix(const OrderedLists& lists,
                                           const std::vector<int>& all_ids);

/// Merges subset records: each pair takes the entry of the highest-plausibility
/// record that covers it and decided it. Ties break toward the larger subset,
/// then the lexicographically smaller id tuple.
CausalOrderingMatrix merge_orderings(const std::vector<PlausibilityRecord>& records);
CausalOrderingMatrix merge_orderings(const std::vector<PlausibilityRecord>& records,
                                     const std::vector<int>& universe);

/// True when the -1 relation admits a topological extension (no directed
/// cycle). Merged matrices may fail this; we report, never repair.
bool has_topological_extension(const CausalOrderingMatrix& m);

}  // namespace parcelingam
