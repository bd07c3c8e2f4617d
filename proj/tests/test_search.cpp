#include <doctest.h>

#include <algorithm>
#include <set>

#include "frann/search.hpp"
#include "oracles.hpp"

using namespace frann;

namespace {

SplitRule rp_rule() {
    SplitRule rule;
    rule.variant = TreeType::RP;
    return rule;
}

std::vector<std::uint32_t> sorted_leaf(const Tree& tree, std::span<const float> q,
                                       std::uint32_t level) {
    const auto pts = tree.node_points(tree.route(q, level));
    std::vector<std::uint32_t> out(pts.begin(), pts.end());
    std::sort(out.begin(), out.end());
    return out;
}

// 1-D corpus 0..7 with RKD trees: all splits are axis 0 and cuts are medians,
// so the whole structure is known by hand (leaves {0,1} {2,3} {4,5} {6,7})
Forest handmade_line_forest() {
    DataMatrix data;
    data.n = 8;
    data.d = 1;
    data.values = {0, 1, 2, 3, 4, 5, 6, 7};
    SplitRule rule;
    rule.variant = TreeType::RKD;
    return grow_forest(data, 2, 2, rule, 123);
}

DataMatrix line_data() {
    DataMatrix data;
    data.n = 8;
    data.d = 1;
    data.values = {0, 1, 2, 3, 4, 5, 6, 7};
    return data;
}

}  // namespace

TEST_CASE("voting with T=1, v=1 returns exactly the query leaf") {
    const DataMatrix data = oracles::random_matrix(200, 8, 11);
    const Forest forest = grow_forest(data, 1, 4, rp_rule(), 7);
    const DataMatrix queries = oracles::random_matrix(5, 8, 12);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        CHECK(candidates_voting(forest, queries.row_span(qi), 1, 4) ==
              sorted_leaf(forest.trees[0], queries.row_span(qi), 4));
    }
}

TEST_CASE("voting with v=T returns the intersection of all leaves") {
    const DataMatrix data = oracles::random_matrix(300, 8, 21);
    const Forest forest = grow_forest(data, 4, 3, rp_rule(), 17);
    const DataMatrix queries = oracles::random_matrix(5, 8, 22);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        std::vector<std::uint32_t> expected = sorted_leaf(forest.trees[0], queries.row_span(qi), 3);
        for (std::uint32_t t = 1; t < 4; ++t) {
            const auto leaf = sorted_leaf(forest.trees[t], queries.row_span(qi), 3);
            std::vector<std::uint32_t> next;
            std::set_intersection(expected.begin(), expected.end(), leaf.begin(), leaf.end(),
                                  std::back_inserter(next));
            expected = std::move(next);
        }
        CHECK(candidates_voting(forest, queries.row_span(qi), 4, 3) == expected);
    }
}

TEST_CASE("voting candidates match a brute-force tally over every point") {
    const DataMatrix data = oracles::random_matrix(500, 10, 31);
    const Forest forest = grow_forest(data, 5, 4, rp_rule(), 19);
    const DataMatrix queries = oracles::random_matrix(4, 10, 32);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        // independent tally: scan each tree's query leaf for every point
        std::vector<std::uint32_t> tally(data.n, 0);
        for (const Tree& tree : forest.trees) {
            const auto leaf = tree.node_points(tree.route(queries.row_span(qi), 4));
            for (std::uint32_t p = 0; p < data.n; ++p) {
                if (std::find(leaf.begin(), leaf.end(), p) != leaf.end()) ++tally[p];
            }
        }
        for (std::uint32_t v = 1; v <= 5; ++v) {
            std::vector<std::uint32_t> expected;
            for (std::uint32_t p = 0; p < data.n; ++p) {
                if (tally[p] >= v) expected.push_back(p);
            }
            CHECK(candidates_voting(forest, queries.row_span(qi), v, 4) == expected);
        }
    }
}

TEST_CASE("vote monotonicity in v and in T") {
    const DataMatrix data = oracles::random_matrix(400, 8, 41);
    const Forest forest = grow_forest(data, 6, 4, rp_rule(), 23);
    const DataMatrix queries = oracles::random_matrix(6, 8, 42);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row_span(qi);
        for (std::uint32_t v = 1; v < 6; ++v) {
            const auto larger = candidates_voting(forest, q, v, 4);
            const auto smaller = candidates_voting(forest, q, v + 1, 4);
            CHECK(std::includes(larger.begin(), larger.end(), smaller.begin(), smaller.end()));
        }
        for (std::uint32_t t = 1; t < 6; ++t) {
            const Forest first_t = subset_index(forest, t, 4);
            const Forest first_t1 = subset_index(forest, t + 1, 4);
            const auto fewer = candidates_voting(first_t, q, 2, 4);
            const auto more = candidates_voting(first_t1, q, 2, 4);
            CHECK(std::includes(more.begin(), more.end(), fewer.begin(), fewer.end()));
        }
    }
}

TEST_CASE("query_voting equals exact knn restricted to the candidate set") {
    const DataMatrix data = oracles::random_matrix(1000, 16, 51);
    const Forest forest = grow_forest(data, 10, 5, rp_rule(), 29);
    const DataMatrix queries = oracles::random_matrix(8, 16, 52);
    SearchParams params;
    params.k = 10;
    params.vote_threshold = 2;
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row_span(qi);
        const auto candidates = candidates_voting(forest, q, 2, 5);
        const auto result = query_voting(forest, data, q, params);
        CHECK(result == knn_within(data, q, candidates, 10));
        // every returned index is a candidate
        for (auto r : result) {
            CHECK(std::binary_search(candidates.begin(), candidates.end(), r));
        }
    }
}

TEST_CASE("empty candidate set yields an empty (short) result") {
    const DataMatrix data = oracles::random_matrix(100, 6, 61);
    const Forest forest = grow_forest(data, 2, 3, rp_rule(), 31);
    SearchParams params;
    params.k = 5;
    params.vote_threshold = 3;  // v > T: nothing can qualify
    const auto result = query_voting(forest, data, data.row_span(0), params);
    CHECK(result.empty());
}

TEST_CASE("containment: candidate set covering the true neighbors gives recall 1") {
    const DataMatrix data = oracles::random_matrix(300, 8, 71);
    const Forest forest = grow_forest(data, 8, 3, rp_rule(), 37);
    const DataMatrix queries = oracles::random_matrix(10, 8, 72);
    SearchParams params;
    params.k = 5;
    params.vote_threshold = 1;
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row_span(qi);
        const auto truth = exact_knn(data, q, 5);
        const auto candidates = candidates_voting(forest, q, 1, 3);
        const bool covered = std::all_of(truth.begin(), truth.end(), [&](std::uint32_t t) {
            return std::binary_search(candidates.begin(), candidates.end(), t);
        });
        if (covered) {
            CHECK(recall_of(query_voting(forest, data, q, params), truth) == 1.0);
        }
    }
}

TEST_CASE("priority queue with b=0 equals voting with v=1") {
    const DataMatrix data = oracles::random_matrix(600, 12, 81);
    const Forest forest = grow_forest(data, 5, 4, rp_rule(), 41);
    const DataMatrix queries = oracles::random_matrix(10, 12, 82);
    SearchParams pq;
    pq.k = 8;
    pq.strategy = SearchParams::Strategy::PriorityQueue;
    pq.extra_branches = 0;
    SearchParams voting;
    voting.k = 8;
    voting.vote_threshold = 1;
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        CHECK(query_priority(forest, data, queries.row_span(qi), pq) ==
              query_voting(forest, data, queries.row_span(qi), voting));
    }
}

TEST_CASE("priority queue with exhaustive b reaches every point (recall 1)") {
    const DataMatrix data = oracles::random_matrix(128, 8, 91);
    const Forest forest = grow_forest(data, 3, 3, rp_rule(), 43);
    SearchParams pq;
    pq.k = 6;
    pq.strategy = SearchParams::Strategy::PriorityQueue;
    pq.extra_branches = 1u << 20;  // more than all branches in the forest
    const DataMatrix queries = oracles::random_matrix(5, 8, 92);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row_span(qi);
        CHECK(query_priority(forest, data, q, pq) == exact_knn(data, q, 6));
    }
}

TEST_CASE("priority queue pops branches in hand-traced order on the 1-D line") {
    // both trees are identical: root cut 3, level-1 cuts 1 and 5,
    // leaves {0,1} {2,3} {4,5} {6,7}
    const Forest forest = handmade_line_forest();
    const DataMatrix data = line_data();
    REQUIRE(forest.trees[0].cuts == std::vector<float>{3, 1, 5});
    REQUIRE(forest.trees[1].cuts == std::vector<float>{3, 1, 5});

    const std::vector<float> q{2.4f};
    // initial descents visit leaf {2,3} twice; queue holds per tree
    // (0.6 -> node right-of-root), (1.4 -> leaf {0,1})
    SearchParams pq;
    pq.strategy = SearchParams::Strategy::PriorityQueue;

    // b=1 pops the 0.6 branch of tree 0 and descends to leaf {4,5}
    pq.k = 8;
    pq.extra_branches = 1;
    CHECK(query_priority(forest, data, q, pq) == std::vector<std::uint32_t>{2, 3, 4, 5});

    // b=2 pops the same branch of tree 1; no new points
    pq.extra_branches = 2;
    CHECK(query_priority(forest, data, q, pq) == std::vector<std::uint32_t>{2, 3, 4, 5});

    // b=3 pops the 1.4 branch (leaf {0,1}); order by distance from 2.4
    pq.extra_branches = 3;
    CHECK(query_priority(forest, data, q, pq) ==
          std::vector<std::uint32_t>{2, 3, 1, 4, 0, 5});

    // b=5 reaches the final sibling {6,7} enqueued during the b=1 descent
    pq.extra_branches = 5;
    CHECK(query_priority(forest, data, q, pq) ==
          std::vector<std::uint32_t>{2, 3, 1, 4, 0, 5, 6, 7});
}

TEST_CASE("depth_override routes to shallower levels") {
    const DataMatrix data = oracles::random_matrix(256, 8, 93);
    const Forest forest = grow_forest(data, 4, 5, rp_rule(), 47);
    SearchParams params;
    params.k = 4;
    params.vote_threshold = 1;
    params.depth_override = 2;
    const auto q = data.row_span(3);
    const auto result = query_voting(forest, data, q, params);
    CHECK(result.size() == 4);
    // shallower level means larger candidate sets than the full depth
    CHECK(candidates_voting(forest, q, 1, 2).size() >=
          candidates_voting(forest, q, 1, 5).size());
    params.depth_override = 9;
    CHECK_THROWS_AS(query_voting(forest, data, q, params), std::invalid_argument);
}

TEST_CASE("strategy mismatches are rejected") {
    const DataMatrix data = oracles::random_matrix(64, 4, 94);
    const Forest forest = grow_forest(data, 2, 2, rp_rule(), 53);
    SearchParams voting;
    voting.strategy = SearchParams::Strategy::Voting;
    CHECK_THROWS_AS(query_priority(forest, data, data.row_span(0), voting),
                    std::invalid_argument);
    SearchParams pq;
    pq.strategy = SearchParams::Strategy::PriorityQueue;
    CHECK_THROWS_AS(query_voting(forest, data, data.row_span(0), pq), std::invalid_argument);
}
