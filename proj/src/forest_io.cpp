#include "frann/forest_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace frann {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'N', 'N', 'I', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) {
        throw std::runtime_error("index file truncated");
    }
    return value;
}

void put_direction(std::ostream& out, const Direction& dir) {
    put(out, std::uint32_t(dir.nnz()));
    out.write(reinterpret_cast<const char*>(dir.idx.data()),
              std::streamsize(dir.idx.size()) * 4);
    out.write(reinterpret_cast<const char*>(dir.w.data()), std::streamsize(dir.w.size()) * 4);
}

Direction get_direction(std::istream& in) {
    Direction dir;
    const auto nnz = get<std::uint32_t>(in);
    dir.idx.resize(nnz);
    dir.w.resize(nnz);
    if (!in.read(reinterpret_cast<char*>(dir.idx.data()), std::streamsize(nnz) * 4) ||
        !in.read(reinterpret_cast<char*>(dir.w.data()), std::streamsize(nnz) * 4)) {
        throw std::runtime_error("index file truncated in direction data");
    }
    return dir;
}

IndexInfo read_header(std::istream& in, const std::filesystem::path& path) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("'" + path.string() + "' is not an index file");
    }
    IndexInfo info;
    info.version = get<std::uint32_t>(in);
    if (info.version != kVersion) {
        throw std::runtime_error("unsupported index version " + std::to_string(info.version));
    }
    info.n = get<std::uint64_t>(in);
    info.d = get<std::uint64_t>(in);
    info.num_trees = get<std::uint32_t>(in);
    info.depth = get<std::uint32_t>(in);
    info.rule.variant = TreeType(get<std::uint32_t>(in));
    info.rule.m_top = get<std::uint32_t>(in);
    info.rule.sparsity = get<double>(in);
    info.rule.pca_dims = get<std::uint32_t>(in);
    info.rule.learning_rate = get<double>(in);
    info.rule.pca_iterations = get<std::uint32_t>(in);
    info.rule.rp_shared_levels = get<std::uint8_t>(in) != 0;
    info.seed = get<std::uint64_t>(in);
    info.data_checksum = get<std::uint64_t>(in);
    info.default_vote_threshold = get<std::uint32_t>(in);
    return info;
}

}  // namespace

void save_forest(const std::filesystem::path& path, const Forest& forest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(kMagic, 8);
    put(out, kVersion);
    put(out, forest.n);
    put(out, forest.d);
    put(out, forest.tree_count());
    put(out, forest.depth);
    put(out, std::uint32_t(forest.rule.variant));
    put(out, forest.rule.m_top);
    put(out, forest.rule.sparsity);
    put(out, forest.rule.pca_dims);
    put(out, forest.rule.learning_rate);
    put(out, forest.rule.pca_iterations);
    put(out, std::uint8_t(forest.rule.rp_shared_levels ? 1 : 0));
    put(out, forest.seed);
    put(out, forest.data_checksum);
    put(out, forest.default_vote_threshold);

    for (const Tree& tree : forest.trees) {
        out.write(reinterpret_cast<const char*>(tree.perm.data()),
                  std::streamsize(tree.perm.size()) * 4);
        out.write(reinterpret_cast<const char*>(tree.cuts.data()),
                  std::streamsize(tree.cuts.size()) * 4);
        put(out, std::uint8_t(tree.shared_levels ? 1 : 0));
        if (tree.shared_levels) {
            for (const Direction& dir : tree.level_dirs) put_direction(out, dir);
            put(out, std::uint32_t(tree.overrides.size()));
            for (const auto& [node, dir] : tree.overrides) {
                put(out, node);
                put_direction(out, dir);
            }
        } else {
            for (const Direction& dir : tree.node_dirs) put_direction(out, dir);
        }
    }
    if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

Forest load_forest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    const IndexInfo info = read_header(in, path);

    Forest forest;
    forest.rule = info.rule;
    forest.seed = info.seed;
    forest.depth = info.depth;
    forest.n = info.n;
    forest.d = info.d;
    forest.data_checksum = info.data_checksum;
    forest.default_vote_threshold = info.default_vote_threshold;
    forest.trees.resize(info.num_trees);

    const auto ranges = compute_node_ranges(info.n, info.depth);
    for (Tree& tree : forest.trees) {
        tree.depth = info.depth;
        tree.perm.resize(std::size_t(info.n));
        if (!in.read(reinterpret_cast<char*>(tree.perm.data()),
                     std::streamsize(tree.perm.size()) * 4)) {
            throw std::runtime_error("index file truncated in permutation");
        }
        tree.cuts.resize(internal_node_count(info.depth));
        if (!in.read(reinterpret_cast<char*>(tree.cuts.data()),
                     std::streamsize(tree.cuts.size()) * 4)) {
            throw std::runtime_error("index file truncated in cuts");
        }
        tree.ranges = ranges;
        tree.shared_levels = get<std::uint8_t>(in) != 0;
        if (tree.shared_levels) {
            tree.level_dirs.reserve(info.depth);
            for (std::uint32_t j = 0; j < info.depth; ++j) {
                tree.level_dirs.push_back(get_direction(in));
            }
            const auto n_overrides = get<std::uint32_t>(in);
            tree.overrides.reserve(n_overrides);
            for (std::uint32_t i = 0; i < n_overrides; ++i) {
                const auto node = get<std::uint32_t>(in);
                tree.overrides.emplace_back(node, get_direction(in));
            }
        } else {
            tree.node_dirs.reserve(internal_node_count(info.depth));
            for (std::uint32_t i = 0; i < internal_node_count(info.depth); ++i) {
                tree.node_dirs.push_back(get_direction(in));
            }
        }
    }
    return forest;
}

IndexInfo read_index_info(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_header(in, path);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> compute_node_ranges(std::uint64_t n,
                                                                         std::uint32_t depth) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges(total_node_count(depth));
    ranges[0] = {0, std::uint32_t(n)};
    for (std::uint32_t node = 0; node < internal_node_count(depth); ++node) {
        const auto [b, e] = ranges[node];
        const std::uint32_t left = (e - b + 1) / 2;
        ranges[2 * node + 1] = {b, b + left};
        ranges[2 * node + 2] = {b + left, e};
    }
    return ranges;
}

}  // namespace frann
