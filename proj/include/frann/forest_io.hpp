#pragma once
// Versioned binary serialization for forests. Node ranges are a pure function
// of (n, depth) under exact median splits, so only the permutation, cuts and
// directions are stored; writes are field-by-field and byte-identical across
// runs with the same inputs.

#include <filesystem>

#include "frann/trees.hpp"

namespace frann {

struct IndexInfo {
    std::uint32_t version = 0;
    std::uint64_t n = 0, d = 0;
    std::uint32_t num_trees = 0, depth = 0;
    SplitRule rule;
    std::uint64_t seed = 0;
    std::uint64_t data_checksum = 0;
    std::uint32_t default_vote_threshold = 0;
};

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

// Header only; cheap inspection without reading the trees.
IndexInfo read_index_info(const std::filesystem::path& path);

// Node ranges in heap layout for a corpus of n points at the given depth
// (left child always takes ceil(size/2) points).
std::vector<std::pair<std::uint32_t, std::uint32_t>> compute_node_ranges(std::uint64_t n,
                                                                         std::uint32_t depth);

}  // namespace frann
