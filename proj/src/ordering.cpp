#include "parcelingam/ordering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace parcelingam {

CausalOrderingMatrix::CausalOrderingMatrix(std::vector<int> ids) : ids_(std::move(ids)) {
  entries_ = Eigen::MatrixXi::Zero(static_cast<int>(ids_.size()),
                                   static_cast<int>(ids_.size()));
}

int CausalOrderingMatrix::position_of(int id) const {
  for (int i = 0; i < d(); ++i)
    if (ids_[i] == id) return i;
  throw IdMismatch("variable id " + std::to_string(id) + " not in ordering matrix");
}

int CausalOrderingMatrix::at_ids(int id_i, int id_j) const {
  return entries_(position_of(id_i), position_of(id_j));
}

void CausalOrderingMatrix::set_pair(int row, int col, int value) {
  if (value < -1 || value > 1) throw std::invalid_argument("entry must be in {-1,0,1}");
  if (row == col) throw std::invalid_argument("diagonal entries are fixed at 0");
  entries_(row, col) = value;
  entries_(col, row) = -value;
}

void CausalOrderingMatrix::set_pair_ids(int id_i, int id_j, int value) {
  set_pair(position_of(id_i), position_of(id_j), value);
}

bool CausalOrderingMatrix::operator==(const CausalOrderingMatrix& other) const {
  return ids_ == other.ids_ && entries_ == other.entries_;
}

std::string CausalOrderingMatrix::to_csv() const {
  std::ostringstream out;
  for (int j = 0; j < d(); ++j) out << (j ? "," : "") << ids_[j];
  out << "\n";
  for (int i = 0; i < d(); ++i) {
    for (int j = 0; j < d(); ++j) out << (j ? "," : "") << entries_(i, j);
    out << "\n";
  }
  return out.str();
}

CausalOrderingMatrix build_ordering_matrix(const OrderedLists& lists,
                                           const std::vector<int>& all_ids) {
  for (int id : lists.k_head)
    if (std::find(lists.k_tail.begin(), lists.k_tail.end(), id) != lists.k_tail.end())
      throw OverlappingLists("variable " + std::to_string(id) +
                             " appears in both K_head and K_tail");

  CausalOrderingMatrix m(all_ids);
  auto rank_in = [](const std::vector<int>& list, int id) -> int {
    auto it = std::find(list.begin(), list.end(), id);
    return it == list.end() ? -1 : static_cast<int>(it - list.begin());
  };

  const int d = m.d();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const int hi = rank_in(lists.k_head, all_ids[i]);
      const int hj = rank_in(lists.k_head, all_ids[j]);
      const int ti = rank_in(lists.k_tail, all_ids[i]);
      const int tj = rank_in(lists.k_tail, all_ids[j]);
      int value = 0;
      if (hi >= 0 && hj >= 0) value = hi < hj ? -1 : 1;  // both in K_head
      else if (ti >= 0 && tj >= 0) value = ti < tj ? -1 : 1;  // both in K_tail
      else if (hi >= 0) value = -1;  // head precedes tail and unlisted alike
      else if (hj >= 0) value = 1;
      else if (ti >= 0) value = 1;   // tail follows unlisted
      else if (tj >= 0) value = -1;
      if (value != 0) m.set_pair(i, j, value);
    }
  }
  return m;
}

namespace {

// Descending plausibility; ties prefer larger subsets, then the
// lexicographically smaller id tuple. Deterministic for golden tests.
bool record_precedes(const PlausibilityRecord& a, const PlausibilityRecord& b) {
  if (a.p_value != b.p_value) return a.p_value > b.p_value;
  if (a.subset.size() != b.subset.size()) return a.subset.size() > b.subset.size();
  return a.subset < b.subset;
}

}  // namespace

CausalOrderingMatrix merge_orderings(const std::vector<PlausibilityRecord>& records,
                                     const std::vector<int>& universe) {
  if (records.empty()) throw std::invalid_argument("merge needs at least one record");

  std::vector<const PlausibilityRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto* a, const auto* b) { return record_precedes(*a, *b); });

  CausalOrderingMatrix merged(universe);
  const int d = merged.d();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const int id_i = universe[i];
      const int id_j = universe[j];
      for (const auto* rec : sorted) {
        const auto& s = rec->subset;
        if (!std::binary_search(s.begin(), s.end(), id_i) ||
            !std::binary_search(s.begin(), s.end(), id_j))
          continue;
        const int value = rec->ordering.at_ids(id_i, id_j);
        if (value != 0) {
          merged.set_pair(i, j, value);
          break;
        }
      }
    }
  }
  return merged;
}

CausalOrderingMatrix merge_orderings(const std::vector<PlausibilityRecord>& records) {
  std::set<int> ids;
  for (const auto& r : records) ids.insert(r.subset.begin(), r.subset.end());
  return merge_orderings(records, std::vector<int>(ids.begin(), ids.end()));
}

bool has_topological_extension(const CausalOrderingMatrix& m) {
  // Kahn's algorithm over the "i before j" relation.
  const int d = m.d();
  std::vector<int> in_degree(d, 0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (m.at(i, j) == -1) ++in_degree[j];

  std::vector<int> ready;
  for (int i = 0; i < d; ++i)
    if (in_degree[i] == 0) ready.push_back(i);

  int removed = 0;
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    ++removed;
    for (int j = 0; j < d; ++j)
      if (m.at(v, j) == -1 && --in_degree[j] == 0) ready.push_back(j);
  }
  return removed == d;
}

}  // namespace parcelingam
