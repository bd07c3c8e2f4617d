#include "frann/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "frann/kernels.hpp"
#include "frann/parallel.hpp"

namespace frann {

namespace {

constexpr std::uint64_t kNodeTag = 0x4e4f4445ULL;   // per-node RNG stream
constexpr std::uint64_t kLevelTag = 0x4c45564cULL;  // shared per-level direction stream
constexpr std::uint64_t kTreeTag = 0x54524545ULL;   // per-tree seed stream

}  // namespace

const char* tree_type_name(TreeType t) {
    switch (t) {
        case TreeType::RKD: return "rkd";
        case TreeType::RP: return "rp";
        case TreeType::RandomizedPCA: return "pca";
    }
    return "?";
}

TreeType parse_tree_type(const std::string& name) {
    if (name == "rkd") return TreeType::RKD;
    if (name == "rp") return TreeType::RP;
    if (name == "pca") return TreeType::RandomizedPCA;
    throw std::invalid_argument("unknown tree type '" + name + "' (expected rkd|rp|pca)");
}

std::uint32_t SplitRule::rp_nonzeros(std::uint64_t d) const {
    const double a = sparsity > 0.0 ? sparsity : 1.0 / std::sqrt(double(d));
    const auto nnz = std::uint64_t(std::ceil(a * double(d)));
    return std::uint32_t(std::clamp<std::uint64_t>(nnz, 1, d));
}

std::uint32_t SplitRule::pca_sample_dims(std::uint64_t d) const {
    const std::uint64_t a = pca_dims > 0 ? pca_dims : std::uint64_t(std::ceil(std::sqrt(double(d))));
    return std::uint32_t(std::clamp<std::uint64_t>(a, 1, d));
}

std::optional<MedianSplit> median_split(std::span<const float> projections) {
    const std::size_t s = projections.size();
    if (s < 2) throw std::invalid_argument("median_split: need at least 2 values");

    std::vector<std::uint32_t> order(s);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (projections[a] != projections[b]) return projections[a] < projections[b];
        return a < b;
    });
    if (projections[order.front()] == projections[order.back()]) return std::nullopt;

    const std::size_t left_size = (s + 1) / 2;
    MedianSplit out;
    out.cut = projections[order[left_size - 1]];
    out.left.assign(order.begin(), order.begin() + std::ptrdiff_t(left_size));
    out.right.assign(order.begin() + std::ptrdiff_t(left_size), order.end());
    return out;
}

Direction random_projection_direction(std::uint64_t d, std::uint32_t nnz, Rng& rng) {
    Direction dir;
    dir.idx = rng.sample_distinct(nnz, std::uint32_t(d));
    dir.w.resize(nnz);
    double norm_sq = 0.0;
    for (auto& w : dir.w) {
        const double g = rng.normal();
        w = float(g);
        norm_sq += g * g;
    }
    if (norm_sq == 0.0) {
        dir.w[0] = 1.0f;  // all draws zero: vanishingly unlikely, keep it unit anyway
        return dir;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& w : dir.w) w = float(double(w) * inv);
    return dir;
}

namespace {

Direction rkd_direction(std::span<const std::uint32_t> points, const DataMatrix& data,
                        const SplitRule& rule, Rng& rng) {
    const std::size_t d = std::size_t(data.d);
    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    for (auto p : points) {
        const float* row = data.row(p);
        for (std::size_t j = 0; j < d; ++j) {
            sum[j] += row[j];
            sum_sq[j] += double(row[j]) * double(row[j]);
        }
    }
    const double s = double(points.size());
    std::vector<double> var(d);
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        var[j] = std::max(0.0, (sum_sq[j] - sum[j] * sum[j] / s) / s);
        max_var = std::max(max_var, var[j]);
    }
    if (max_var == 0.0) {
        // identical points in every coordinate
        return random_projection_direction(data.d, rule.rp_nonzeros(data.d), rng);
    }
    const std::size_t m = std::min<std::size_t>(rule.m_top, d);
    std::vector<std::uint32_t> axes(d);
    std::iota(axes.begin(), axes.end(), 0u);
    std::partial_sort(axes.begin(), axes.begin() + std::ptrdiff_t(m), axes.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (var[a] != var[b]) return var[a] > var[b];
                          return a < b;
                      });
    Direction dir;
    dir.idx = {axes[rng.uniform(m)]};
    dir.w = {1.0f};
    return dir;
}

Direction pca_direction(std::span<const std::uint32_t> points, const DataMatrix& data,
                        const SplitRule& rule, Rng& rng) {
    const std::uint32_t a = rule.pca_sample_dims(data.d);
    std::vector<std::uint32_t> coords = rng.sample_distinct(a, std::uint32_t(data.d));

    // sample covariance of the node restricted to the sampled coordinates
    const std::size_t s = points.size();
    std::vector<double> mean(a, 0.0);
    std::vector<double> sub(s * a);
    for (std::size_t i = 0; i < s; ++i) {
        const float* row = data.row(points[i]);
        for (std::uint32_t j = 0; j < a; ++j) {
            const double v = row[coords[j]];
            sub[i * a + j] = v;
            mean[j] += v;
        }
    }
    for (auto& m : mean) m /= double(s);
    std::vector<double> cov(std::size_t(a) * a, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::uint32_t r = 0; r < a; ++r) {
            const double xr = sub[i * a + r] - mean[r];
            for (std::uint32_t c = r; c < a; ++c) {
                cov[std::size_t(r) * a + c] += xr * (sub[i * a + c] - mean[c]);
            }
        }
    }
    double cov_max = 0.0;
    for (std::uint32_t r = 0; r < a; ++r) {
        for (std::uint32_t c = r; c < a; ++c) {
            cov[std::size_t(r) * a + c] /= double(s);
            cov[std::size_t(c) * a + r] = cov[std::size_t(r) * a + c];
            cov_max = std::max(cov_max, std::abs(cov[std::size_t(r) * a + c]));
        }
    }
    if (cov_max == 0.0) {
        return random_projection_direction(data.d, rule.rp_nonzeros(data.d), rng);
    }

    // gradient ascent on the Rayleigh quotient: w <- w + gamma*C*w, renormalized
    std::vector<double> w(a), cw(a);
    double norm_sq = 0.0;
    for (auto& v : w) {
        v = rng.normal();
        norm_sq += v * v;
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& v : w) v *= inv;
    for (std::uint32_t it = 0; it < rule.pca_iterations; ++it) {
        for (std::uint32_t r = 0; r < a; ++r) {
            double acc = 0.0;
            for (std::uint32_t c = 0; c < a; ++c) acc += cov[std::size_t(r) * a + c] * w[c];
            cw[r] = acc;
        }
        norm_sq = 0.0;
        for (std::uint32_t r = 0; r < a; ++r) {
            w[r] += rule.learning_rate * cw[r];
            norm_sq += w[r] * w[r];
        }
        if (norm_sq == 0.0) break;
        inv = 1.0 / std::sqrt(norm_sq);
        for (auto& v : w) v *= inv;
    }

    Direction dir;
    dir.idx = std::move(coords);  // sample_distinct returns them ascending
    dir.w.resize(a);
    for (std::uint32_t j = 0; j < a; ++j) dir.w[j] = float(w[j]);
    return dir;
}

}  // namespace

Direction generate_direction(std::span<const std::uint32_t> node_points, const DataMatrix& data,
                             const SplitRule& rule, Rng& rng) {
    switch (rule.variant) {
        case TreeType::RKD:
            if (node_points.size() < 2) {
                throw std::invalid_argument("generate_direction: RKD needs >= 2 points");
            }
            return rkd_direction(node_points, data, rule, rng);
        case TreeType::RP:
            return random_projection_direction(data.d, rule.rp_nonzeros(data.d), rng);
        case TreeType::RandomizedPCA:
            if (node_points.size() < 2) {
                throw std::invalid_argument("generate_direction: PCA needs >= 2 points");
            }
            return pca_direction(node_points, data, rule, rng);
    }
    throw std::invalid_argument("generate_direction: unknown tree type");
}

std::vector<float> project(std::span<const std::uint32_t> points, const DataMatrix& data,
                           const Direction& dir) {
    if (!dir.idx.empty() && dir.idx.back() >= data.d) {
        throw std::invalid_argument("project: direction index out of range");
    }
    std::vector<float> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = kernels::sparse_dot(data.row(points[i]), dir.idx.data(), dir.w.data(),
                                     dir.nnz());
    }
    return out;
}

const Direction& Tree::direction_at(std::uint32_t node, std::uint32_t level) const {
    if (shared_levels) {
        const auto it = std::lower_bound(
            overrides.begin(), overrides.end(), node,
            [](const auto& entry, std::uint32_t key) { return entry.first < key; });
        if (it != overrides.end() && it->first == node) return it->second;
        return level_dirs[level];
    }
    return node_dirs[node];
}

std::uint32_t Tree::route(std::span<const float> q, std::uint32_t level) const {
    std::uint32_t node = 0;
    for (std::uint32_t j = 0; j < level; ++j) {
        const Direction& dir = direction_at(node, j);
        const float proj = kernels::sparse_dot(q.data(), dir.idx.data(), dir.w.data(), dir.nnz());
        node = proj <= cuts[node] ? 2 * node + 1 : 2 * node + 2;
    }
    return node;
}

std::pair<std::uint32_t, std::uint32_t> Tree::traverse(std::span<const float> q,
                                                       std::uint32_t level) const {
    if (level > depth) throw std::invalid_argument("traverse: level exceeds tree depth");
    return ranges[route(q, level)];
}

namespace {

struct NodeSplit {
    float cut = 0.0f;
    std::uint32_t left_size = 0;
    std::optional<Direction> override_dir;  // set when a retry direction was used
};

// Reorders perm[b, e) so the left child occupies the first ceil(s/2) slots.
NodeSplit split_node(const DataMatrix& data, const SplitRule& rule, std::uint64_t tree_seed,
                     std::uint32_t node, std::vector<std::uint32_t>& perm, std::uint32_t b,
                     std::uint32_t e, const float* shared_proj, const Direction* shared_dir,
                     Direction* node_dir_slot) {
    const std::uint32_t s = e - b;
    const std::span<const std::uint32_t> points{perm.data() + b, std::size_t(s)};
    Rng rng(derive_seed(tree_seed, kNodeTag ^ (std::uint64_t(node) << 8)));

    std::vector<float> proj;
    if (shared_proj != nullptr) {
        proj.assign(shared_proj + b, shared_proj + e);
    } else {
        *node_dir_slot = generate_direction(points, data, rule, rng);
        proj = project(points, data, *node_dir_slot);
    }
    const float base_proj = proj[0];  // cut for the all-degenerate fallback

    NodeSplit out;
    auto ms = median_split(proj);
    for (int attempt = 0; !ms && attempt < 3; ++attempt) {
        Direction retry = random_projection_direction(data.d, rule.rp_nonzeros(data.d), rng);
        proj = project(points, data, retry);
        ms = median_split(proj);
        if (ms) {
            if (shared_dir != nullptr) {
                out.override_dir = std::move(retry);
            } else {
                *node_dir_slot = std::move(retry);
            }
        }
    }

    std::vector<std::uint32_t> reordered;
    reordered.reserve(s);
    if (ms) {
        out.cut = ms->cut;
        out.left_size = std::uint32_t(ms->left.size());
        for (auto pos : ms->left) reordered.push_back(points[pos]);
        for (auto pos : ms->right) reordered.push_back(points[pos]);
    } else {
        // still degenerate after retries (duplicated points): split in corpus
        // index order at the midpoint; the node keeps its original direction,
        // so the cut is the projection value shared by every point
        reordered.assign(points.begin(), points.end());
        std::sort(reordered.begin(), reordered.end());
        out.cut = base_proj;
        out.left_size = (s + 1) / 2;
    }
    std::copy(reordered.begin(), reordered.end(), perm.begin() + b);
    return out;
}

}  // namespace

Tree grow_tree(const DataMatrix& data, std::uint32_t depth, const SplitRule& rule,
               std::uint64_t seed) {
    if (data.n < 2) throw std::invalid_argument("grow_tree: need at least 2 points");
    const auto max_depth = std::uint32_t(std::floor(std::log2(double(data.n))));
    if (depth < 1 || depth > max_depth) {
        throw std::invalid_argument("grow_tree: depth must be in [1, " +
                                    std::to_string(max_depth) + "]");
    }

    Tree tree;
    tree.depth = depth;
    tree.perm.resize(std::size_t(data.n));
    std::iota(tree.perm.begin(), tree.perm.end(), 0u);
    tree.ranges.assign(total_node_count(depth), {0, 0});
    tree.ranges[0] = {0, std::uint32_t(data.n)};
    tree.cuts.assign(internal_node_count(depth), 0.0f);
    tree.shared_levels = rule.variant == TreeType::RP && rule.rp_shared_levels;
    if (tree.shared_levels) {
        tree.level_dirs.reserve(depth);
        for (std::uint32_t j = 0; j < depth; ++j) {
            Rng level_rng(derive_seed(seed, kLevelTag ^ (std::uint64_t(j) << 8)));
            tree.level_dirs.push_back(
                random_projection_direction(data.d, rule.rp_nonzeros(data.d), level_rng));
        }
    } else {
        tree.node_dirs.assign(internal_node_count(depth), Direction{});
    }

    std::vector<float> level_proj;
    for (std::uint32_t j = 0; j < depth; ++j) {
        const Direction* shared_dir = nullptr;
        const float* shared_proj = nullptr;
        if (tree.shared_levels) {
            shared_dir = &tree.level_dirs[j];
            level_proj = project(tree.perm, data, *shared_dir);
            shared_proj = level_proj.data();
        }
        for (std::uint32_t node = level_first_node(j); node < level_first_node(j + 1); ++node) {
            const auto [b, e] = tree.ranges[node];
            Direction* slot = tree.shared_levels ? nullptr : &tree.node_dirs[node];
            const NodeSplit split = split_node(data, rule, seed, node, tree.perm, b, e,
                                               shared_proj, shared_dir, slot);
            tree.cuts[node] = split.cut;
            tree.ranges[2 * node + 1] = {b, b + split.left_size};
            tree.ranges[2 * node + 2] = {b + split.left_size, e};
            if (split.override_dir) {
                tree.overrides.emplace_back(node, std::move(*split.override_dir));
            }
        }
    }
    // nodes are visited in heap order, so overrides are already sorted
    return tree;
}

Forest grow_forest(const DataMatrix& data, std::uint32_t num_trees, std::uint32_t depth,
                   const SplitRule& rule, std::uint64_t seed) {
    if (num_trees < 1) throw std::invalid_argument("grow_forest: need at least one tree");
    Forest forest;
    forest.rule = rule;
    forest.seed = seed;
    forest.depth = depth;
    forest.n = data.n;
    forest.d = data.d;
    forest.data_checksum = corpus_checksum(data);
    forest.trees.resize(num_trees);
    parallel_for(num_trees, [&](std::size_t t) {
        forest.trees[t] =
            grow_tree(data, depth, rule, derive_seed(seed, kTreeTag ^ (std::uint64_t(t) << 8)));
    });
    return forest;
}

Forest subset_index(const Forest& forest, std::uint32_t t, std::uint32_t depth) {
    if (t < 1 || t > forest.tree_count()) {
        throw std::invalid_argument("subset_index: tree count out of range");
    }
    if (depth < 1 || depth > forest.depth) {
        throw std::invalid_argument("subset_index: depth out of range");
    }
    Forest out;
    out.rule = forest.rule;
    out.seed = forest.seed;
    out.depth = depth;
    out.n = forest.n;
    out.d = forest.d;
    out.data_checksum = forest.data_checksum;
    out.default_vote_threshold = forest.default_vote_threshold;
    out.trees.reserve(t);
    for (std::uint32_t i = 0; i < t; ++i) {
        const Tree& src = forest.trees[i];
        Tree pruned;
        pruned.depth = depth;
        pruned.perm = src.perm;
        pruned.ranges.assign(src.ranges.begin(),
                             src.ranges.begin() + total_node_count(depth));
        pruned.cuts.assign(src.cuts.begin(), src.cuts.begin() + internal_node_count(depth));
        pruned.shared_levels = src.shared_levels;
        if (src.shared_levels) {
            pruned.level_dirs.assign(src.level_dirs.begin(), src.level_dirs.begin() + depth);
            for (const auto& [node, dir] : src.overrides) {
                if (node < internal_node_count(depth)) pruned.overrides.emplace_back(node, dir);
            }
        } else {
            pruned.node_dirs.assign(src.node_dirs.begin(),
                                    src.node_dirs.begin() + internal_node_count(depth));
        }
        out.trees.push_back(std::move(pruned));
    }
    return out;
}

}  // namespace frann
