#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "parcelingam/ordering.hpp"
#include "parcelingam/serialize.hpp"

using namespace parcelingam;

namespace {

CausalOrderingMatrix golden(const std::vector<int>& ids,
                            const std::vector<std::vector<int>>& rows) {
  CausalOrderingMatrix m(ids);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = i + 1; j < rows.size(); ++j)
      if (rows[i][j] != 0)
        m.set_pair(static_cast<int>(i), static_cast<int>(j), rows[i][j]);
  return m;
}

}  // namespace

TEST_CASE("build_ordering_matrix hand-enumerated golden cases") {
  // Case 1: complete top-down order over 3 variables.
  CHECK(build_ordering_matrix({{1, 2, 3}, {}}, {1, 2, 3}) ==
        golden({1, 2, 3}, {{0, -1, -1}, {1, 0, -1}, {1, 1, 0}}));

  // Case 2: nothing learned on 4 variables.
  CHECK(build_ordering_matrix({{}, {}}, {1, 2, 3, 4}) ==
        golden({1, 2, 3, 4},
               {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}));

  // Case 3: d=5, K_head=[2], K_tail=[4]: 2 precedes all, 4 follows all,
  // the pairs among {1,3,5} stay unknown.
  CHECK(build_ordering_matrix({{2}, {4}}, {1, 2, 3, 4, 5}) ==
        golden({1, 2, 3, 4, 5}, {{0, 1, 0, -1, 0},
                                 {-1, 0, -1, -1, -1},
                                 {0, 1, 0, -1, 0},
                                 {1, 1, 1, 0, 1},
                                 {0, 1, 0, -1, 0}}));

  // Case 4: complete bottom-up order.
  CHECK(build_ordering_matrix({{}, {1, 2, 3}}, {1, 2, 3}) ==
        golden({1, 2, 3}, {{0, -1, -1}, {1, 0, -1}, {1, 1, 0}}));

  // Case 5: both lists, nobody unlisted: head [3], tail [1, 2] over {1,2,3}.
  CHECK(build_ordering_matrix({{3}, {1, 2}}, {1, 2, 3}) ==
        golden({1, 2, 3}, {{0, -1, 1}, {1, 0, 1}, {-1, -1, 0}}));

  // Case 6: head [5, 1], nothing else, d=5.
  CHECK(build_ordering_matrix({{5, 1}, {}}, {1, 2, 3, 4, 5}) ==
        golden({1, 2, 3, 4, 5}, {{0, -1, -1, -1, 1},
                                 {1, 0, 0, 0, 1},
                                 {1, 0, 0, 0, 1},
                                 {1, 0, 0, 0, 1},
                                 {-1, -1, -1, -1, 0}}));

  // Case 7: tail [4, 2] only, d=4: order ends ... 4, 2.
  CHECK(build_ordering_matrix({{}, {4, 2}}, {1, 2, 3, 4}) ==
        golden({1, 2, 3, 4},
               {{0, -1, 0, -1}, {1, 0, 1, 1}, {0, -1, 0, -1}, {1, -1, 1, 0}}));

  // Case 8: head [2], tail [3] over {1,2,3}: fully decided.
  CHECK(build_ordering_matrix({{2}, {3}}, {1, 2, 3}) ==
        golden({1, 2, 3}, {{0, 1, -1}, {-1, 0, -1}, {1, 1, 0}}));

  // Case 9: d=6, head [1, 4], tail [6, 3].
  CHECK(build_ordering_matrix({{1, 4}, {6, 3}}, {1, 2, 3, 4, 5, 6}) ==
        golden({1, 2, 3, 4, 5, 6}, {{0, -1, -1, -1, -1, -1},
                                    {1, 0, -1, 1, 0, -1},
                                    {1, 1, 0, 1, 1, 1},
                                    {-1, -1, -1, 0, -1, -1},
                                    {1, 0, -1, 1, 0, -1},
                                    {1, 1, -1, 1, 1, 0}}));

  // Case 10: d=2 ordered by the head-completion rule.
  CHECK(build_ordering_matrix({{2, 1}, {}}, {1, 2}) ==
        golden({1, 2}, {{0, 1}, {-1, 0}}));
}

TEST_CASE("build_ordering_matrix invariants") {
  const OrderedLists lists{{3, 1}, {7}};
  const std::vector<int> ids{1, 2, 3, 5, 7};
  const CausalOrderingMatrix m = build_ordering_matrix(lists, ids);

  for (int i = 0; i < m.d(); ++i) {
    CHECK(m.at(i, i) == 0);
    for (int j = 0; j < m.d(); ++j) CHECK(m.at(i, j) == -m.at(j, i));
  }

  // zero count = u*(u-1) where u = unlisted variables
  const int unlisted = 5 - 2 - 1;
  int zeros = 0;
  for (int i = 0; i < m.d(); ++i)
    for (int j = 0; j < m.d(); ++j)
      if (i != j && m.at(i, j) == 0) ++zeros;
  CHECK(zeros == unlisted * (unlisted - 1));

  CHECK_THROWS_AS(build_ordering_matrix({{1, 2}, {2}}, {1, 2, 3}), OverlappingLists);
}

TEST_CASE("merge_orderings rank and fallback rules") {
  auto record = [](std::vector<int> subset, double p,
                   const std::vector<std::pair<std::pair<int, int>, int>>& pairs) {
    PlausibilityRecord r;
    r.subset = std::move(subset);
    r.p_value = p;
    r.ordering = CausalOrderingMatrix(r.subset);
    for (const auto& [ij, v] : pairs) r.ordering.set_pair_ids(ij.first, ij.second, v);
    return r;
  };

  SUBCASE("single record is passed through") {
    const auto r = record({1, 2, 3}, 0.5, {{{1, 2}, -1}, {{1, 3}, -1}, {{2, 3}, -1}});
    const CausalOrderingMatrix m = merge_orderings({r});
    CHECK(m == r.ordering);
  }

  SUBCASE("higher plausibility wins a conflict") {
    const auto strong = record({1, 2}, 0.9, {{{1, 2}, -1}});
    const auto weak = record({1, 2}, 0.2, {{{1, 2}, 1}});
    CHECK(merge_orderings({weak, strong}).at_ids(1, 2) == -1);
    CHECK(merge_orderings({strong, weak}).at_ids(1, 2) == -1);
  }

  SUBCASE("an undecided strong record defers to a decided weaker one") {
    const auto strong = record({1, 2}, 0.9, {});
    const auto weak = record({1, 2}, 0.3, {{{1, 2}, -1}});
    CHECK(merge_orderings({strong, weak}).at_ids(1, 2) == -1);
  }

  SUBCASE("permutation invariance with distinct p-values") {
    const auto a = record({1, 2, 3}, 0.8, {{{1, 2}, -1}});
    const auto b = record({2, 3}, 0.6, {{{2, 3}, -1}});
    const auto c = record({1, 3}, 0.4, {{{1, 3}, 1}});
    const CausalOrderingMatrix m1 = merge_orderings({a, b, c});
    const CausalOrderingMatrix m2 = merge_orderings({c, a, b});
    CHECK(m1 == m2);
  }

  SUBCASE("ties prefer the larger subset, then the smaller id tuple") {
    const auto small = record({1, 2}, 0.5, {{{1, 2}, 1}});
    const auto large = record({1, 2, 3}, 0.5, {{{1, 2}, -1}});
    CHECK(merge_orderings({small, large}).at_ids(1, 2) == -1);

    const auto lex_hi = record({2, 3}, 0.5, {{{2, 3}, 1}});
    const auto lex_lo = record({1, 2, 3}, 0.5, {{{2, 3}, -1}});
    CHECK(merge_orderings({lex_hi, lex_lo}).at_ids(2, 3) == -1);
  }

  SUBCASE("a decided pair never reverts to unknown") {
    const auto decided = record({1, 2}, 0.1, {{{1, 2}, -1}});
    const auto undecided = record({1, 2}, 0.9, {});
    CHECK(merge_orderings({decided, undecided}).at_ids(1, 2) == -1);
  }
}

TEST_CASE("topological extension diagnostic") {
  CausalOrderingMatrix ok({1, 2, 3});
  ok.set_pair_ids(1, 2, -1);
  ok.set_pair_ids(2, 3, -1);
  ok.set_pair_ids(1, 3, -1);
  CHECK(has_topological_extension(ok));

  CausalOrderingMatrix cycle({1, 2, 3});
  cycle.set_pair_ids(1, 2, -1);
  cycle.set_pair_ids(2, 3, -1);
  cycle.set_pair_ids(3, 1, -1);
  CHECK_FALSE(has_topological_extension(cycle));
}

TEST_CASE("ordering matrix serialization") {
  CausalOrderingMatrix m({4, 7});
  m.set_pair_ids(4, 7, -1);

  const Json j = to_json(m);
  CHECK(j["variable_ids"] == Json::array({4, 7}));
  CHECK(j["entries"][0][1] == -1);
  CHECK(j["entries"][1][0] == 1);

  CHECK(m.to_csv() == "4,7\n0,-1\n1,0\n");
}
