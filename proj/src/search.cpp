#include "frann/search.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "frann/kernels.hpp"

namespace frann {

namespace {

// Per-thread vote counters with a touched-list so reset costs O(candidates),
// not O(n).
struct VoteScratch {
    std::vector<std::uint16_t> votes;
    std::vector<std::uint32_t> touched;

    void ensure(std::size_t n) {
        if (votes.size() < n) votes.assign(n, 0);
        touched.clear();
    }
    void bump(std::uint32_t p) {
        if (votes[p]++ == 0) touched.push_back(p);
    }
    void reset() {
        for (auto p : touched) votes[p] = 0;
        touched.clear();
    }
};

VoteScratch& scratch() {
    thread_local VoteScratch s;
    return s;
}

std::uint32_t resolve_level(const Forest& forest, const SearchParams& params) {
    const std::uint32_t level = params.depth_override.value_or(forest.depth);
    if (level > forest.depth) {
        throw std::invalid_argument("depth_override exceeds forest depth");
    }
    return level;
}

}  // namespace

std::vector<std::uint32_t> candidates_voting(const Forest& forest, std::span<const float> q,
                                             std::uint32_t v, std::uint32_t level) {
    if (v < 1) throw std::invalid_argument("vote threshold must be >= 1");
    if (level > forest.depth) throw std::invalid_argument("level exceeds forest depth");

    VoteScratch& s = scratch();
    s.ensure(std::size_t(forest.n));
    for (const Tree& tree : forest.trees) {
        const auto [b, e] = tree.traverse(q, level);
        for (std::uint32_t i = b; i < e; ++i) s.bump(tree.perm[i]);
    }
    std::vector<std::uint32_t> out;
    for (auto p : s.touched) {
        if (s.votes[p] >= v) out.push_back(p);
    }
    s.reset();
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> knn_within(const DataMatrix& data, std::span<const float> q,
                                      std::span<const std::uint32_t> candidates,
                                      std::uint32_t k) {
    std::vector<std::pair<float, std::uint32_t>> dist;
    dist.reserve(candidates.size());
    for (auto p : candidates) {
        dist.emplace_back(kernels::l2_sq(data.row(p), q.data(), std::size_t(data.d)), p);
    }
    const std::size_t keep = std::min<std::size_t>(k, dist.size());
    if (keep < dist.size()) {
        std::nth_element(dist.begin(), dist.begin() + std::ptrdiff_t(keep - 1), dist.end());
        dist.resize(keep);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::uint32_t> out(keep);
    for (std::size_t i = 0; i < keep; ++i) out[i] = dist[i].second;
    return out;
}

std::vector<std::uint32_t> query_voting(const Forest& forest, const DataMatrix& data,
                                        std::span<const float> q, const SearchParams& params) {
    if (params.strategy != SearchParams::Strategy::Voting) {
        throw std::invalid_argument("query_voting: params.strategy is not Voting");
    }
    const std::uint32_t level = resolve_level(forest, params);
    const auto candidates = candidates_voting(forest, q, params.vote_threshold, level);
    return knn_within(data, q, candidates, params.k);
}

std::vector<std::uint32_t> query_priority(const Forest& forest, const DataMatrix& data,
                                          std::span<const float> q, const SearchParams& params) {
    if (params.strategy != SearchParams::Strategy::PriorityQueue) {
        throw std::invalid_argument("query_priority: params.strategy is not PriorityQueue");
    }
    const std::uint32_t level = resolve_level(forest, params);

    // (margin, tree, node-at-level) keyed min-heap; the tuple tail keeps pop
    // order deterministic when margins tie
    using Branch = std::tuple<float, std::uint32_t, std::uint32_t, std::uint32_t>;
    std::priority_queue<Branch, std::vector<Branch>, std::greater<>> heap;

    VoteScratch& s = scratch();
    s.ensure(std::size_t(forest.n));

    const auto descend = [&](std::uint32_t t, std::uint32_t node, std::uint32_t lvl) {
        const Tree& tree = forest.trees[t];
        while (lvl < level) {
            const Direction& dir = tree.direction_at(node, lvl);
            const float proj =
                kernels::sparse_dot(q.data(), dir.idx.data(), dir.w.data(), dir.nnz());
            const float cut = tree.cuts[node];
            const bool go_left = proj <= cut;
            const std::uint32_t next = go_left ? 2 * node + 1 : 2 * node + 2;
            const std::uint32_t sibling = go_left ? 2 * node + 2 : 2 * node + 1;
            heap.emplace(std::abs(proj - cut), t, sibling, lvl + 1);
            node = next;
            ++lvl;
        }
        const auto [b, e] = tree.node_range(node);
        for (std::uint32_t i = b; i < e; ++i) s.bump(tree.perm[i]);
    };

    for (std::uint32_t t = 0; t < forest.tree_count(); ++t) descend(t, 0, 0);
    for (std::uint32_t pops = 0; pops < params.extra_branches && !heap.empty(); ++pops) {
        const auto [margin, t, node, lvl] = heap.top();
        heap.pop();
        descend(t, node, lvl);
    }

    std::vector<std::uint32_t> candidates(s.touched.begin(), s.touched.end());
    s.reset();
    std::sort(candidates.begin(), candidates.end());
    return knn_within(data, q, candidates, params.k);
}

std::vector<std::uint32_t> run_query(const Forest& forest, const DataMatrix& data,
                                     std::span<const float> q, const SearchParams& params) {
    return params.strategy == SearchParams::Strategy::Voting
               ? query_voting(forest, data, q, params)
               : query_priority(forest, data, q, params);
}

}  // namespace frann
