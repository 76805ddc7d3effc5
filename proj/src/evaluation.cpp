#include "parcelingam/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace parcelingam {

ScoreReport score_ordering(const CausalOrderingMatrix& est,
                           const SemGroundTruth& truth, bool exclude_path_free) {
  const auto& truth_matrix = truth.true_ordering;
  std::vector<int> ids = est.variable_ids();
  {
    std::vector<int> truth_ids = truth_matrix.variable_ids();
    std::vector<int> a = ids, b = truth_ids;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw IdMismatch("estimate and truth cover different variables");
  }
  std::sort(ids.begin(), ids.end());

  ScoreReport report;
  for (size_t a = 0; a < ids.size(); ++a) {
    for (size_t b = a + 1; b < ids.size(); ++b) {
      const int pi = truth_matrix.position_of(ids[a]);
      const int pj = truth_matrix.position_of(ids[b]);
      if (exclude_path_free && truth.path_free(pi, pj)) {
        ++report.excluded_pairs;
        continue;
      }
      ++report.total_true_pairs;
      const int estimated = est.at_ids(ids[a], ids[b]);
      if (estimated == 0) continue;
      ++report.decided_pairs;
      if (estimated == truth_matrix.entries()(pi, pj)) ++report.correct_pairs;
    }
  }

  if (report.decided_pairs > 0)
    report.precision =
        static_cast<double>(report.correct_pairs) / report.decided_pairs;
  report.recall = report.total_true_pairs > 0
                      ? static_cast<double>(report.correct_pairs) /
                            report.total_true_pairs
                      : 0.0;
  if (report.precision && report.recall > 0.0 &&
      *report.precision + report.recall > 0.0)
    report.f_measure = 2.0 * *report.precision * report.recall /
                       (*report.precision + report.recall);
  return report;
}

StrengthScore score_strengths(const std::map<std::pair<int, int>, double>& est,
                              const SemGroundTruth& truth) {
  StrengthScore score;
  if (est.empty()) return score;
  double sum_sq = 0.0;
  for (const auto& [pair, value] : est) {
    const int pi = truth.true_ordering.position_of(pair.first);
    const int pj = truth.true_ordering.position_of(pair.second);
    const double diff = value - truth.true_B(pi, pj);
    sum_sq += diff * diff;
    ++score.count;
  }
  score.rmse = std::sqrt(sum_sq / score.count);
  return score;
}

namespace {

// ---------------------------------------------------------------------------
// Population mirror of the estimator. Variables are represented by their
// mixing coefficients over the independent sources (q latents then d noises,
// unit variance). Independence of two linear forms holds exactly when they
// share no source, so every statistical test becomes a support check, and
// every admissible argmax choice is explored as a branch.
// ---------------------------------------------------------------------------

constexpr double kCoefTol = 1e-9;
constexpr int kBranchBudget = 512;

struct PopState {
  Eigen::MatrixXd rows;  // active variables x sources
  std::vector<int> ids;
};

bool nonzero(double v, double scale) { return std::abs(v) > kCoefTol * scale; }

double row_scale(const Eigen::MatrixXd& rows, int r) {
  return std::max(1.0, rows.row(r).cwiseAbs().maxCoeff());
}

bool pop_independent(const Eigen::MatrixXd& rows, int a, int b) {
  const double sa = row_scale(rows, a);
  const double sb = row_scale(rows, b);
  for (int k = 0; k < rows.cols(); ++k)
    if (nonzero(rows(a, k), sa) && nonzero(rows(b, k), sb)) return false;
  return true;
}

// Residual coefficients of row i after regressing on row j (population).
Eigen::RowVectorXd pop_simple_residual(const Eigen::MatrixXd& rows, int i, int j) {
  const double var_j = rows.row(j).squaredNorm();
  return rows.row(i) - (rows.row(i).dot(rows.row(j)) / var_j) * rows.row(j);
}

struct PopLeaves {
  std::vector<OrderedLists> leaves;
  bool overflow = false;
};

void pop_bottom_up(const PopState& original, const std::vector<int>& k_head,
                   PopLeaves& out);

void pop_top_down(PopState state, std::vector<int> k_head,
                  const PopState& original, PopLeaves& out) {
  if (static_cast<int>(out.leaves.size()) >= kBranchBudget) {
    out.overflow = true;
    return;
  }
  const int d_total = static_cast<int>(original.ids.size());
  const int active = static_cast<int>(state.ids.size());

  if (active == 1) {
    k_head.push_back(state.ids[0]);
    out.leaves.push_back({k_head, {}});
    return;
  }

  std::vector<int> passing;
  for (int j = 0; j < active; ++j) {
    bool exogenous = true;
    if (state.rows.row(j).squaredNorm() < kCoefTol * kCoefTol) continue;
    for (int i = 0; i < active && exogenous; ++i) {
      if (i == j) continue;
      Eigen::MatrixXd pair(2, state.rows.cols());
      pair.row(0) = state.rows.row(j);
      pair.row(1) = pop_simple_residual(state.rows, i, j);
      if (!pop_independent(pair, 0, 1)) exogenous = false;
    }
    if (exogenous) passing.push_back(j);
  }

  if (passing.empty()) {
    if (static_cast<int>(k_head.size()) < d_total - 2)
      pop_bottom_up(original, k_head, out);
    else
      out.leaves.push_back({k_head, {}});
    return;
  }

  for (int j : passing) {
    PopState next;
    next.rows.resize(active - 1, state.rows.cols());
    next.ids.reserve(active - 1);
    int r = 0;
    for (int i = 0; i < active; ++i) {
      if (i == j) continue;
      next.rows.row(r++) = pop_simple_residual(state.rows, i, j);
      next.ids.push_back(state.ids[i]);
    }
    std::vector<int> head = k_head;
    head.push_back(state.ids[j]);
    if (static_cast<int>(head.size()) == d_total - 1) {
      head.push_back(next.ids[0]);
      out.leaves.push_back({head, {}});
    } else {
      pop_top_down(std::move(next), std::move(head), original, out);
    }
  }
}

void pop_bottom_up_step(const PopState& original, const std::vector<int>& k_head,
                        std::vector<int> alive, std::vector<int> candidates,
                        std::vector<int> k_tail, PopLeaves& out) {
  if (static_cast<int>(out.leaves.size()) >= kBranchBudget) {
    out.overflow = true;
    return;
  }

  std::vector<int> passing;
  for (int id : candidates) {
    std::vector<int> rest;
    for (int a : alive)
      if (a != id) rest.push_back(a);

    Eigen::MatrixXd reg(static_cast<int>(rest.size()), original.rows.cols());
    for (size_t r = 0; r < rest.size(); ++r) {
      auto it = std::find(original.ids.begin(), original.ids.end(), rest[r]);
      reg.row(static_cast<int>(r)) =
          original.rows.row(it - original.ids.begin());
    }
    auto self = std::find(original.ids.begin(), original.ids.end(), id);
    const Eigen::RowVectorXd xj = original.rows.row(self - original.ids.begin());

    const Eigen::MatrixXd gram = reg * reg.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) continue;
    const Eigen::VectorXd beta = ldlt.solve(reg * xj.transpose());
    const Eigen::RowVectorXd residual = xj - beta.transpose() * reg;

    bool independent = true;
    for (int r = 0; r < reg.rows() && independent; ++r) {
      Eigen::MatrixXd pair(2, original.rows.cols());
      pair.row(0) = reg.row(r);
      pair.row(1) = residual;
      if (!pop_independent(pair, 0, 1)) independent = false;
    }
    if (independent) passing.push_back(id);
  }

  if (passing.empty()) {
    out.leaves.push_back({k_head, k_tail});
    return;
  }
  for (int id : passing) {
    std::vector<int> next_alive;
    for (int a : alive)
      if (a != id) next_alive.push_back(a);
    std::vector<int> next_cand;
    for (int c : candidates)
      if (c != id) next_cand.push_back(c);
    std::vector<int> next_tail = k_tail;
    next_tail.insert(next_tail.begin(), id);
    if (static_cast<int>(next_cand.size()) < 3)
      out.leaves.push_back({k_head, next_tail});
    else
      pop_bottom_up_step(original, k_head, std::move(next_alive),
                         std::move(next_cand), std::move(next_tail), out);
  }
}

void pop_bottom_up(const PopState& original, const std::vector<int>& k_head,
                   PopLeaves& out) {
  std::vector<int> candidates;
  for (int id : original.ids)
    if (std::find(k_head.begin(), k_head.end(), id) == k_head.end())
      candidates.push_back(id);
  pop_bottom_up_step(original, k_head, original.ids, std::move(candidates), {}, out);
}

PopLeaves pop_algorithm1(const PopState& model) {
  PopLeaves out;
  pop_top_down(model, {}, model, out);

  // dedupe identical leaves reached through different branch orders
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  std::vector<OrderedLists> unique;
  for (auto& leaf : out.leaves)
    if (seen.insert({leaf.k_head, leaf.k_tail}).second) unique.push_back(leaf);
  out.leaves = std::move(unique);
  return out;
}

void record_decisions(const OrderedLists& lists, const std::vector<int>& ids,
                      std::map<std::pair<int, int>, std::set<int>>& decisions) {
  const CausalOrderingMatrix m = build_ordering_matrix(lists, ids);
  for (size_t a = 0; a < ids.size(); ++a)
    for (size_t b = a + 1; b < ids.size(); ++b) {
      const int v = m.at(static_cast<int>(a), static_cast<int>(b));
      if (v != 0) decisions[{ids[a], ids[b]}].insert(v);
    }
}

std::vector<std::vector<int>> pop_subsets(const std::vector<int>& ids) {
  std::vector<std::vector<int>> subsets;
  const int d = static_cast<int>(ids.size());
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    if (__builtin_popcount(mask) < 2) continue;
    std::vector<int> subset;
    for (int i = 0; i < d; ++i)
      if (mask & (1u << i)) subset.push_back(ids[i]);
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

}  // namespace

MaxRecallReport max_recall(const SemSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const int q = spec.q;

  // Mixing over sources: x = (I - B)^{-1} (Lambda f + e).
  const Eigen::MatrixXd inv =
      (Eigen::MatrixXd::Identity(d, d) - spec.B).inverse();
  Eigen::MatrixXd mixing(d, q + d);
  mixing.leftCols(q) = inv * spec.Lambda;
  mixing.rightCols(d) = inv;

  PopState full;
  full.rows = mixing;
  full.ids.resize(d);
  for (int i = 0; i < d; ++i) full.ids[i] = i + 1;

  std::map<std::pair<int, int>, std::set<int>> decisions;
  bool overflow = false;

  const PopLeaves top = pop_algorithm1(full);
  overflow |= top.overflow;

  for (const auto& leaf : top.leaves) {
    record_decisions(leaf, full.ids, decisions);

    std::vector<int> residual_ids;
    for (int id : full.ids) {
      const bool in_head =
          std::find(leaf.k_head.begin(), leaf.k_head.end(), id) != leaf.k_head.end();
      const bool in_tail =
          std::find(leaf.k_tail.begin(), leaf.k_tail.end(), id) != leaf.k_tail.end();
      if (!in_head && !in_tail) residual_ids.push_back(id);
    }
    if (static_cast<int>(residual_ids.size()) <= 2) continue;

    // Population residualization of the unresolved block on the heads.
    PopState res;
    res.ids = residual_ids;
    res.rows.resize(static_cast<int>(residual_ids.size()), mixing.cols());
    if (leaf.k_head.empty()) {
      for (size_t r = 0; r < residual_ids.size(); ++r)
        res.rows.row(static_cast<int>(r)) = mixing.row(residual_ids[r] - 1);
    } else {
      Eigen::MatrixXd heads(static_cast<int>(leaf.k_head.size()), mixing.cols());
      for (size_t h = 0; h < leaf.k_head.size(); ++h)
        heads.row(static_cast<int>(h)) = mixing.row(leaf.k_head[h] - 1);
      const Eigen::MatrixXd gram = heads * heads.transpose();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      for (size_t r = 0; r < residual_ids.size(); ++r) {
        const Eigen::RowVectorXd xi = mixing.row(residual_ids[r] - 1);
        const Eigen::VectorXd beta = ldlt.solve(heads * xi.transpose());
        res.rows.row(static_cast<int>(r)) = xi - beta.transpose() * heads;
      }
    }

    for (const auto& subset : pop_subsets(residual_ids)) {
      PopState sub;
      sub.ids = subset;
      sub.rows.resize(static_cast<int>(subset.size()), mixing.cols());
      for (size_t r = 0; r < subset.size(); ++r) {
        auto it = std::find(res.ids.begin(), res.ids.end(), subset[r]);
        sub.rows.row(static_cast<int>(r)) = res.rows.row(it - res.ids.begin());
      }
      const PopLeaves sub_leaves = pop_algorithm1(sub);
      overflow |= sub_leaves.overflow;
      for (const auto& sub_leaf : sub_leaves.leaves)
        record_decisions(sub_leaf, subset, decisions);
    }
  }

  // Ground truth in spec coordinates.
  const auto topo = spec.topological_order();
  std::vector<int> rank(d);
  for (int r = 0; r < d; ++r) rank[topo[r] - 1] = r;

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(d, d);
  reach.setConstant(false);
  for (int src = 0; src < d; ++src) {
    std::vector<int> stack{src};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < d; ++v)
        if (spec.B(v, u) != 0.0 && !reach(src, v)) {
          reach(src, v) = true;
          stack.push_back(v);
        }
    }
  }

  MaxRecallReport report;
  report.total_pairs = d * (d - 1) / 2;
  report.decisions = CausalOrderingMatrix(full.ids);
  report.conflicts = overflow;

  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      auto it = decisions.find({i + 1, j + 1});
      if (it == decisions.end()) continue;
      if (it->second.size() != 1) {
        report.conflicts = true;
        continue;
      }
      const int value = *it->second.begin();
      int truth;
      if (reach(i, j)) truth = -1;
      else if (reach(j, i)) truth = 1;
      else truth = rank[i] < rank[j] ? -1 : 1;
      report.decisions.set_pair(i, j, value);
      if (value == truth) ++report.identifiable_pairs;
      else report.conflicts = true;  // a population decision disagreeing with
                                     // the generating order means ambiguity
    }
  }
  report.max_recall =
      report.total_pairs > 0
          ? static_cast<double>(report.identifiable_pairs) / report.total_pairs
          : 0.0;
  return report;
}

}  // namespace parcelingam
