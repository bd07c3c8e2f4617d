#pragma once
// Randomized space-partitioning trees: a single tree grown by recursive
// median splits under one of three direction-generation strategies, and
// forests of independent trees.
//
// Trees are stored implicitly: a permutation of the point indices arranged so
// every node of the complete binary tree owns a contiguous range, plus one cut
// value and one sparse direction per internal node (or one direction per level
// for random-projection trees in shared mode). Every node derives its own RNG
// from (tree seed, heap index), so growing to depth L and later truncating to
// L' < L yields exactly the structure of a tree grown directly at L'.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "frann/dataset.hpp"
#include "frann/rng.hpp"

namespace frann {

enum class TreeType { RKD, RP, RandomizedPCA };

const char* tree_type_name(TreeType t);
TreeType parse_tree_type(const std::string& name);

struct SplitRule {
    TreeType variant = TreeType::RP;
    std::uint32_t m_top = 5;           // RKD: sample among the m highest-variance axes
    double sparsity = 0.0;             // RP: fraction of non-zero components; 0 = 1/sqrt(d)
    std::uint32_t pca_dims = 0;        // PCA: sampled coordinate count; 0 = ceil(sqrt(d))
    double learning_rate = 0.01;       // PCA gradient-ascent step
    std::uint32_t pca_iterations = 20; // PCA gradient-ascent updates
    bool rp_shared_levels = true;      // RP: one direction per level across all nodes

    std::uint32_t rp_nonzeros(std::uint64_t d) const;
    std::uint32_t pca_sample_dims(std::uint64_t d) const;
};

struct Direction {
    std::vector<std::uint32_t> idx;  // strictly increasing, < d
    std::vector<float> w;

    std::size_t nnz() const { return idx.size(); }
};

struct MedianSplit {
    float cut = 0.0f;
    std::vector<std::uint32_t> left;   // positions into the input sequence
    std::vector<std::uint32_t> right;
};

// Cut at the ceil(s/2)-th smallest projection; ties broken by input position
// so the left side has exactly ceil(s/2) elements. Returns nullopt when all
// projections are identical (degenerate split; caller retries the direction).
std::optional<MedianSplit> median_split(std::span<const float> projections);

// Split direction for one node. RKD: one-hot on a variance-maximal axis.
// RP: sparse Gaussian unit vector. PCA: leading eigenvector of the sample
// covariance restricted to randomly sampled coordinates, approximated by
// gradient ascent. Degenerate nodes (no variance) fall back to an RP draw.
Direction generate_direction(std::span<const std::uint32_t> node_points, const DataMatrix& data,
                             const SplitRule& rule, Rng& rng);

// Sparse Gaussian unit vector on nnz sampled coordinates.
Direction random_projection_direction(std::uint64_t d, std::uint32_t nnz, Rng& rng);

// Projections of the given corpus points onto dir, in input order.
std::vector<float> project(std::span<const std::uint32_t> points, const DataMatrix& data,
                           const Direction& dir);

inline std::uint32_t level_first_node(std::uint32_t level) { return (1u << level) - 1; }
inline std::uint32_t internal_node_count(std::uint32_t depth) { return (1u << depth) - 1; }
inline std::uint32_t total_node_count(std::uint32_t depth) { return (2u << depth) - 1; }

struct Tree {
    std::uint32_t depth = 0;
    std::vector<std::uint32_t> perm;                            // n entries
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;  // heap layout, all nodes
    std::vector<float> cuts;                                    // internal nodes
    bool shared_levels = false;
    std::vector<Direction> level_dirs;                          // shared mode: depth entries
    std::vector<Direction> node_dirs;                           // per-node mode
    std::vector<std::pair<std::uint32_t, Direction>> overrides; // degenerate retries, sorted

    const Direction& direction_at(std::uint32_t node, std::uint32_t level) const;
    std::pair<std::uint32_t, std::uint32_t> node_range(std::uint32_t node) const {
        return ranges[node];
    }
    std::span<const std::uint32_t> node_points(std::uint32_t node) const {
        const auto [b, e] = ranges[node];
        return {perm.data() + b, std::size_t(e - b)};
    }

    // Heap index of the node on q's root-to-leaf path at the given level.
    std::uint32_t route(std::span<const float> q, std::uint32_t level) const;

    // Permutation range of that node. Requires level <= depth.
    std::pair<std::uint32_t, std::uint32_t> traverse(std::span<const float> q,
                                                     std::uint32_t level) const;
};

struct Forest {
    SplitRule rule;
    std::uint64_t seed = 0;
    std::uint32_t depth = 0;
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::uint64_t data_checksum = 0;
    std::uint32_t default_vote_threshold = 0;  // 0 = unset; filled in by autotuning
    std::vector<Tree> trees;

    std::uint32_t tree_count() const { return std::uint32_t(trees.size()); }
};

// Requires 1 <= depth <= floor(log2 n); the structure is a deterministic
// function of (data, depth, rule, seed).
Tree grow_tree(const DataMatrix& data, std::uint32_t depth, const SplitRule& rule,
               std::uint64_t seed);

// T independent trees with per-tree seeds derived from (seed, tree index);
// built concurrently with results identical to a sequential build.
Forest grow_forest(const DataMatrix& data, std::uint32_t num_trees, std::uint32_t depth,
                   const SplitRule& rule, std::uint64_t seed);

// First t trees pruned to the given depth; answers queries identically to a
// forest grown directly at (t, depth) with the same seed.
Forest subset_index(const Forest& forest, std::uint32_t t, std::uint32_t depth);

}  // namespace frann
