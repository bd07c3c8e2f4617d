#pragma once
// k-NN queries against a forest: voting search and priority-queue search.
// Queries are read-only over the forest and corpus; each thread keeps its own
// vote-counter scratch, so any number of queries may run concurrently.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "frann/dataset.hpp"
#include "frann/trees.hpp"

namespace frann {

struct SearchParams {
    enum class Strategy { Voting, PriorityQueue };

    std::uint32_t k = 1;
    Strategy strategy = Strategy::Voting;
    std::uint32_t vote_threshold = 1;   // v: minimum co-occurrence count (voting)
    std::uint32_t extra_branches = 0;   // b: extra branches popped (priority queue)
    std::optional<std::uint32_t> depth_override;  // route only to this level
};

// Points sharing a leaf with q in at least v of the T trees at the given
// level, ascending index. v > T yields an empty set (not an error).
std::vector<std::uint32_t> candidates_voting(const Forest& forest, std::span<const float> q,
                                             std::uint32_t v, std::uint32_t level);

// Exact k-NN of q within the voting candidate set, ascending distance, ties by
// index. Fewer than k candidates yield a short result.
std::vector<std::uint32_t> query_voting(const Forest& forest, const DataMatrix& data,
                                        std::span<const float> q, const SearchParams& params);

// Priority-queue search: descends all trees collecting q's leaves while
// enqueuing unexplored siblings keyed by |projection - cut|, then pops the b
// closest branches (enqueuing further siblings along each descent). Exact
// k-NN within the union of visited leaves.
std::vector<std::uint32_t> query_priority(const Forest& forest, const DataMatrix& data,
                                          std::span<const float> q, const SearchParams& params);

// Dispatches on params.strategy.
std::vector<std::uint32_t> run_query(const Forest& forest, const DataMatrix& data,
                                     std::span<const float> q, const SearchParams& params);

// Exact k-NN of q restricted to the given candidate indices.
std::vector<std::uint32_t> knn_within(const DataMatrix& data, std::span<const float> q,
                                      std::span<const std::uint32_t> candidates, std::uint32_t k);

}  // namespace frann
