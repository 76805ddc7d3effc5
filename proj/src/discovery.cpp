#include "parcelingam/discovery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "parcelingam/core_stats.hpp"

namespace parcelingam {

namespace {

constexpr double kPClampFloor = 1e-300;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::min(resolve_threads(threads), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Evidence shared by every subset run over the same data matrix: the
// first top-down selection round of any subset only needs pairwise
// p-values P_H(x_j, r_i^(j)), and bottom-up regressor Gram matrices depend
// only on the raw rows. Both are precomputed once and read concurrently.
struct SharedEvidence {
  std::map<std::pair<int, int>, double> pair_p;  // (regressor id, other id)
  std::set<int> degenerate_rows;                 // variance at/below the floor
  std::map<int, std::optional<GramMatrix>> row_gram;  // nullopt = constant row
};

Eigen::VectorXd capped_copy(const Eigen::Ref<const Eigen::VectorXd>& v,
                            const std::vector<int>& idx) {
  if (static_cast<int>(idx.size()) == v.size()) return v;
  Eigen::VectorXd out(static_cast<int>(idx.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = v[idx[i]];
  return out;
}

struct CandidateScore {
  int id = -1;
  double fisher_p = -1.0;
  std::vector<double> component_ps;
};

class HybridSearch {
 public:
  HybridSearch(const DataMatrix& x, double alpha, const DiscoveryOptions& opts,
               const SharedEvidence* shared)
      : x_(x), alpha_(alpha), opts_(opts), shared_(shared),
        cap_idx_(capped_indices(x.n(), opts.hsic_sample_cap)) {}

  Algorithm1Result run() {
    top_down();
    const int d = x_.d();
    const int head = static_cast<int>(trace_.lists.k_head.size());
    if (head < d && head < d - 2) bottom_up();
    else if (head < d) trace_.stop_reason = StopReason::IndependenceRejectedTopDown;

    Algorithm1Result result;
    result.trace = trace_;
    result.lists = trace_.lists;
    result.ordering = build_ordering_matrix(trace_.lists, x_.variable_ids);
    return result;
  }

 private:
  void warn(const std::string& msg) { trace_.warnings.push_back(msg); }

  std::optional<GramMatrix> gram_of(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    try {
      return compute_gram(capped_copy(v, cap_idx_));
    } catch (const ConstantInput&) {
      return std::nullopt;
    }
  }

  // HSIC p-value with the constant-input convention (p = 1).
  double pair_p_value(const std::optional<GramMatrix>& gu,
                      const Eigen::Ref<const Eigen::VectorXd>& v, bool* warned) {
    if (!gu) {
      *warned = true;
      return 1.0;
    }
    const auto gv = gram_of(v);
    if (!gv) {
      *warned = true;
      return 1.0;
    }
    return hsic_from_grams(*gu, *gv).p_value;
  }

  void top_down() {
    std::vector<int> active = x_.variable_ids;
    Eigen::MatrixXd data = x_.values;  // rows follow `active`
    const int d = x_.d();
    bool first_round = true;

    while (true) {
      const int m_count = static_cast<int>(active.size());
      if (m_count == 1) {  // |K_head| = d-1 completion appended the rest below
        trace_.lists.k_head.push_back(active[0]);
        trace_.head_p_values[active[0]] = {};
        trace_.stop_reason = StopReason::AllOrdered;
        return;
      }

      std::optional<CandidateScore> best;
      Eigen::MatrixXd best_residuals;
      for (int cj = 0; cj < m_count; ++cj) {
        CandidateScore score;
        score.id = active[cj];
        Eigen::MatrixXd residuals(m_count - 1, data.cols());
        bool excluded = false;

        if (first_round && shared_) {
          if (shared_->degenerate_rows.count(score.id)) {
            warn("variable " + std::to_string(score.id) +
                 " skipped this round: degenerate variance");
            continue;
          }
          for (int ci = 0; ci < m_count; ++ci) {
            if (ci == cj) continue;
            score.component_ps.push_back(
                shared_->pair_p.at({score.id, active[ci]}));
          }
        } else {
          std::optional<GramMatrix> gj;
          try {
            const Eigen::VectorXd xj = data.row(cj);
            gj = gram_of(xj);
            if (!gj) throw DegenerateVariance("constant candidate");
            int r = 0;
            for (int ci = 0; ci < m_count; ++ci) {
              if (ci == cj) continue;
              residuals.row(r) = simple_residual(data.row(ci), xj).transpose();
              bool warned = false;
              score.component_ps.push_back(
                  pair_p_value(gj, residuals.row(r).transpose(), &warned));
              if (warned)
                warn("constant residual of " + std::to_string(active[ci]) +
                     " on " + std::to_string(score.id) + " treated as independent");
              ++r;
            }
          } catch (const DegenerateVariance&) {
            excluded = true;
          }
          if (excluded) {
            warn("variable " + std::to_string(score.id) +
                 " skipped this round: degenerate variance");
            continue;
          }
        }

        score.fisher_p = fisher_combine(score.component_ps).p_value;
        if (!best || score.fisher_p > best->fisher_p) {  // ties keep smaller id
          best = std::move(score);
          if (!(first_round && shared_)) best_residuals = std::move(residuals);
        }
      }

      if (!best) {  // every candidate excluded: stop as if rejected
        trace_.stop_reason = StopReason::IndependenceRejectedTopDown;
        return;
      }
      if (best->fisher_p < alpha_) {
        trace_.stop_reason = StopReason::IndependenceRejectedTopDown;
        return;
      }

      const int m_pos = static_cast<int>(
          std::find(active.begin(), active.end(), best->id) - active.begin());
      if (first_round && shared_) {
        best_residuals.resize(m_count - 1, data.cols());
        const Eigen::VectorXd xm = data.row(m_pos);
        int r = 0;
        for (int ci = 0; ci < m_count; ++ci) {
          if (ci == m_pos) continue;
          best_residuals.row(r++) = simple_residual(data.row(ci), xm).transpose();
        }
      }

      trace_.lists.k_head.push_back(best->id);
      trace_.head_p_values[best->id] = best->component_ps;
      active.erase(active.begin() + m_pos);
      data = std::move(best_residuals);
      first_round = false;

      if (static_cast<int>(trace_.lists.k_head.size()) == d - 1) {
        trace_.lists.k_head.push_back(active[0]);
        trace_.head_p_values[active[0]] = {};
        trace_.stop_reason = StopReason::AllOrdered;
        return;
      }
    }
  }

  void bottom_up() {
    // Works on the original data; discovered sinks are dropped, heads stay
    // in the regressor pool.
    std::vector<int> alive = x_.variable_ids;
    std::vector<int> candidates;
    for (int id : alive)
      if (std::find(trace_.lists.k_head.begin(), trace_.lists.k_head.end(), id) ==
          trace_.lists.k_head.end())
        candidates.push_back(id);
    std::sort(candidates.begin(), candidates.end());

    std::map<int, std::optional<GramMatrix>> local_grams;
    auto regressor_gram = [&](int id) -> const std::optional<GramMatrix>& {
      if (shared_) {
        return shared_->row_gram.at(id);
      }
      auto it = local_grams.find(id);
      if (it == local_grams.end())
        it = local_grams.emplace(id, gram_of(x_.values.row(x_.position_of(id)))).first;
      return it->second;
    };

    while (true) {
      std::optional<CandidateScore> best;
      for (int id : candidates) {
        CandidateScore score;
        score.id = id;

        std::vector<int> rest;
        for (int a : alive)
          if (a != id) rest.push_back(a);

        Eigen::MatrixXd rest_rows(static_cast<int>(rest.size()), x_.n());
        for (int r = 0; r < static_cast<int>(rest.size()); ++r)
          rest_rows.row(r) = x_.values.row(x_.position_of(rest[r]));

        Eigen::VectorXd residual;
        try {
          residual = multiple_residual(x_.values.row(x_.position_of(id)).transpose(),
                                       rest_rows);
        } catch (const Error&) {
          warn("variable " + std::to_string(id) +
               " skipped this round: singular regressor covariance");
          continue;
        }

        const auto g_res = gram_of(residual);
        for (int r = 0; r < static_cast<int>(rest.size()); ++r) {
          bool warned = false;
          double p = 1.0;
          const auto& g_reg = regressor_gram(rest[r]);
          if (g_reg && g_res)
            p = hsic_from_grams(*g_reg, *g_res).p_value;
          else
            warned = true;
          if (warned)
            warn("constant input in sink test of " + std::to_string(id) +
                 " against " + std::to_string(rest[r]) + " treated as independent");
          score.component_ps.push_back(p);
        }
        score.fisher_p = fisher_combine(score.component_ps).p_value;
        if (!best || score.fisher_p > best->fisher_p) best = std::move(score);
      }

      if (!best || best->fisher_p < alpha_) {
        trace_.stop_reason = StopReason::IndependenceRejectedBottomUp;
        return;
      }

      trace_.lists.k_tail.insert(trace_.lists.k_tail.begin(), best->id);
      trace_.tail_p_values[best->id] = best->component_ps;
      alive.erase(std::find(alive.begin(), alive.end(), best->id));
      candidates.erase(std::find(candidates.begin(), candidates.end(), best->id));

      if (static_cast<int>(candidates.size()) < 3) {
        trace_.stop_reason = StopReason::FewerThanThreeRemain;
        return;
      }
    }
  }

  const DataMatrix& x_;
  double alpha_;
  DiscoveryOptions opts_;
  const SharedEvidence* shared_;
  std::vector<int> cap_idx_;
  Algorithm1Trace trace_;
};

SharedEvidence build_shared_evidence(const DataMatrix& x, const DiscoveryOptions& opts) {
  SharedEvidence shared;
  const int d = x.d();
  const auto idx = capped_indices(x.n(), opts.hsic_sample_cap);

  std::vector<std::optional<GramMatrix>> grams(d);
  parallel_for(d, opts.threads, [&](int i) {
    try {
      grams[i] = compute_gram(capped_copy(x.values.row(i), idx));
    } catch (const ConstantInput&) {
      grams[i] = std::nullopt;
    }
  });
  for (int i = 0; i < d; ++i) {
    shared.row_gram[x.variable_ids[i]] = grams[i];
    if (sample_variance(x.values.row(i)) <= kDegenerateVariance)
      shared.degenerate_rows.insert(x.variable_ids[i]);
  }

  std::vector<std::map<std::pair<int, int>, double>> per_j(d);
  parallel_for(d, opts.threads, [&](int cj) {
    const int id_j = x.variable_ids[cj];
    if (shared.degenerate_rows.count(id_j)) return;
    const Eigen::VectorXd xj = x.values.row(cj);
    const auto& gj = grams[cj];
    for (int ci = 0; ci < d; ++ci) {
      if (ci == cj) continue;
      double p = 1.0;
      if (gj) {
        const Eigen::VectorXd r = simple_residual(x.values.row(ci), xj);
        try {
          p = hsic_from_grams(*gj, compute_gram(capped_copy(r, idx))).p_value;
        } catch (const ConstantInput&) {
          p = 1.0;
        }
      }
      per_j[cj][{id_j, x.variable_ids[ci]}] = p;
    }
  });
  for (auto& m : per_j) shared.pair_p.merge(m);
  return shared;
}

std::vector<std::vector<int>> enumerate_subsets(std::vector<int> ids) {
  // Sizes descending, lexicographic within a size.
  std::sort(ids.begin(), ids.end());
  const int d = static_cast<int>(ids.size());
  std::vector<std::vector<int>> subsets;
  for (int l = d; l >= 2; --l) {
    std::vector<int> pick(l);
    for (int i = 0; i < l; ++i) pick[i] = i;
    while (true) {
      std::vector<int> subset(l);
      for (int i = 0; i < l; ++i) subset[i] = ids[pick[i]];
      subsets.push_back(std::move(subset));
      int i = l - 1;
      while (i >= 0 && pick[i] == d - l + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < l; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return subsets;
}

double component_log_sum(const Algorithm1Trace& trace) {
  double sum = 0.0;
  for (const auto& [id, ps] : trace.head_p_values)
    for (double p : ps) sum += std::log(std::clamp(p, kPClampFloor, 1.0));
  for (const auto& [id, ps] : trace.tail_p_values)
    for (double p : ps) sum += std::log(std::clamp(p, kPClampFloor, 1.0));
  return sum;
}

Algorithm1Result run_hybrid(const DataMatrix& x, double alpha,
                            const DiscoveryOptions& opts, const SharedEvidence* shared) {
  return HybridSearch(x, alpha, opts, shared).run();
}

}  // namespace

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::AllOrdered: return "all_ordered";
    case StopReason::IndependenceRejectedTopDown: return "independence_rejected_top_down";
    case StopReason::IndependenceRejectedBottomUp: return "independence_rejected_bottom_up";
    case StopReason::FewerThanThreeRemain: return "fewer_than_three_remain";
  }
  return "unknown";
}

Algorithm1Result algorithm1(const DataMatrix& x, double alpha,
                            const DiscoveryOptions& opts) {
  x.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  return run_hybrid(x, alpha, opts, nullptr);
}

double plausibility(const Algorithm1Trace& trace) {
  std::vector<double> components;
  for (const auto& [id, ps] : trace.head_p_values)
    components.insert(components.end(), ps.begin(), ps.end());
  for (const auto& [id, ps] : trace.tail_p_values)
    components.insert(components.end(), ps.begin(), ps.end());
  if (components.empty()) return 0.0;  // nothing ordered: least plausible
  return fisher_combine(components).p_value;
}

Algorithm2Result algorithm2(const DataMatrix& x, double alpha,
                            const DiscoveryOptions& opts) {
  x.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (x.d() > opts.subset_cap) throw SubsetBudgetExceeded(x.d(), opts.subset_cap);

  const SharedEvidence shared = build_shared_evidence(x, opts);
  const auto subsets = enumerate_subsets(x.variable_ids);

  Algorithm2Result result;
  result.records.resize(subsets.size());
  parallel_for(static_cast<int>(subsets.size()), opts.threads, [&](int s) {
    const DataMatrix sub = x.subset(subsets[s]);
    const Algorithm1Result run = run_hybrid(sub, alpha, opts, &shared);
    PlausibilityRecord record;
    record.subset = subsets[s];
    record.ordering = run.ordering;
    record.p_value = plausibility(run.trace);
    record.component_log_p_sum = component_log_sum(run.trace);
    result.records[s] = std::move(record);
  });

  std::vector<int> universe = x.variable_ids;
  std::sort(universe.begin(), universe.end());
  result.ordering = merge_orderings(result.records, universe);
  return result;
}

DiscoveryResult algorithm3(const DataMatrix& x, double alpha,
                           const DiscoveryOptions& opts) {
  x.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");

  Algorithm1Result full = run_hybrid(x, alpha, opts, nullptr);
  DiscoveryResult result;
  result.trace = full.trace;
  result.ordering = full.ordering;

  std::vector<int> residual_ids;
  for (int id : x.variable_ids) {
    const auto& head = full.lists.k_head;
    const auto& tail = full.lists.k_tail;
    if (std::find(head.begin(), head.end(), id) == head.end() &&
        std::find(tail.begin(), tail.end(), id) == tail.end())
      residual_ids.push_back(id);
  }
  std::sort(residual_ids.begin(), residual_ids.end());

  if (static_cast<int>(residual_ids.size()) > 2) {
    // Remove the discovered exogenous variables from the unresolved block by
    // one joint least-squares pass, then enumerate its subsets.
    DataMatrix r_res;
    r_res.variable_ids = residual_ids;
    r_res.values.resize(static_cast<int>(residual_ids.size()), x.n());
    if (full.lists.k_head.empty()) {
      for (int i = 0; i < static_cast<int>(residual_ids.size()); ++i)
        r_res.values.row(i) = x.values.row(x.position_of(residual_ids[i]));
    } else {
      Eigen::MatrixXd heads(static_cast<int>(full.lists.k_head.size()), x.n());
      for (int h = 0; h < static_cast<int>(full.lists.k_head.size()); ++h)
        heads.row(h) = x.values.row(x.position_of(full.lists.k_head[h]));
      for (int i = 0; i < static_cast<int>(residual_ids.size()); ++i)
        r_res.values.row(i) = multiple_residual(
            x.values.row(x.position_of(residual_ids[i])).transpose(), heads);
    }

    DiscoveryOptions sub_opts = opts;
    Algorithm2Result stage2 = algorithm2(r_res, alpha, sub_opts);
    result.subset_records = std::move(stage2.records);
    for (int i : residual_ids)
      for (int j : residual_ids) {
        if (i >= j) continue;
        if (result.ordering.at_ids(i, j) == 0) {
          const int value = stage2.ordering.at_ids(i, j);
          if (value != 0) result.ordering.set_pair_ids(i, j, value);
        }
      }
  }

  // Connection strengths for rows whose order against everything is known.
  const int d = x.d();
  for (int i = 0; i < d; ++i) {
    bool decided = true;
    for (int j = 0; j < d && decided; ++j)
      if (i != j && result.ordering.at(i, j) == 0) decided = false;
    if (!decided) continue;

    std::vector<int> predecessors;
    for (int j = 0; j < d; ++j)
      if (result.ordering.at(i, j) == 1) predecessors.push_back(j);

    const int id_i = x.variable_ids[i];
    std::map<int, double> row;
    for (int j = 0; j < d; ++j)
      if (j != i) row[x.variable_ids[j]] = 0.0;

    if (!predecessors.empty()) {
      Eigen::MatrixXd reg(static_cast<int>(predecessors.size()), x.n());
      for (int r = 0; r < static_cast<int>(predecessors.size()); ++r)
        reg.row(r) = x.values.row(predecessors[r]);
      try {
        const Eigen::VectorXd beta =
            regression_coefficients(x.values.row(i).transpose(), reg);
        for (int r = 0; r < static_cast<int>(predecessors.size()); ++r)
          row[x.variable_ids[predecessors[r]]] = beta[r];
      } catch (const Error& e) {
        result.trace.warnings.push_back("strengths for variable " +
                                        std::to_string(id_i) +
                                        " skipped: " + e.what());
        continue;
      }
    }
    for (const auto& [id_j, value] : row) result.strengths[{id_i, id_j}] = value;
  }
  return result;
}

}  // namespace parcelingam
