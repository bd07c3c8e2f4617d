#include "frann/autotune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "frann/kernels.hpp"
#include "frann/parallel.hpp"

namespace frann {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

TuningLimits TuningLimits::defaults_for(std::uint64_t n, std::uint32_t k,
                                        std::uint32_t t_max) {
    TuningLimits lim;
    lim.t_max = t_max;
    lim.v_max = t_max;
    lim.k = k;
    const auto max_depth = std::uint32_t(std::floor(std::log2(double(n))));
    lim.depth_max = std::max<std::uint32_t>(1, max_depth);
    // very shallow trees make vote counting O(n) per tree; keep leaves <= ~256
    lim.depth_min = lim.depth_max > 8 ? lim.depth_max - 8 : 1;
    return lim;
}

void TuningLimits::validate(std::uint64_t n) const {
    const auto max_depth = std::uint32_t(std::floor(std::log2(double(n))));
    if (t_max < 1) throw std::invalid_argument("limits: t_max must be >= 1");
    if (v_max < 1 || v_max > t_max) {
        throw std::invalid_argument("limits: v_max must be in [1, t_max]");
    }
    if (depth_min < 1 || depth_min > depth_max) {
        throw std::invalid_argument("limits: need 1 <= depth_min <= depth_max");
    }
    if (depth_max > max_depth) {
        throw std::invalid_argument("limits: depth_max exceeds floor(log2 n) = " +
                                    std::to_string(max_depth));
    }
    if (k < 1 || k > n) throw std::invalid_argument("limits: k must be in [1, n]");
}

std::vector<std::uint32_t> count_votes(const Tree& tree, std::uint32_t level,
                                       std::span<const float> q,
                                       const std::function<bool(std::uint32_t)>& members,
                                       std::vector<std::uint16_t>& votes,
                                       std::uint32_t v_max) {
    std::vector<std::uint32_t> counts(v_max, 0);
    const auto [b, e] = tree.traverse(q, level);
    for (std::uint32_t i = b; i < e; ++i) {
        const std::uint32_t p = tree.perm[i];
        if (members(p)) {
            const std::uint16_t tally = ++votes[p];
            if (tally <= v_max) ++counts[tally - 1];
        }
    }
    return counts;
}

ElectionTensor count_elected(const Forest& forest, const TuningLimits& limits,
                             std::span<const float> q,
                             const std::function<bool(std::uint32_t)>& members) {
    if (forest.tree_count() < limits.t_max || forest.depth < limits.depth_max) {
        throw std::invalid_argument("count_elected: forest smaller than the tuning limits");
    }
    ElectionTensor tensor(limits);
    std::vector<std::uint16_t> votes(std::size_t(forest.n), 0);
    std::vector<std::uint64_t> cumulative(limits.v_max);

    // route once per tree; the node at each level is a prefix of the same path
    std::vector<std::uint32_t> path_nodes(std::size_t(limits.t_max) * (limits.depth_max + 1));
    for (std::uint32_t t = 0; t < limits.t_max; ++t) {
        std::uint32_t node = 0;
        path_nodes[t * (limits.depth_max + 1)] = 0;
        for (std::uint32_t lvl = 0; lvl < limits.depth_max; ++lvl) {
            const Tree& tree = forest.trees[t];
            const Direction& dir = tree.direction_at(node, lvl);
            const float proj =
                kernels::sparse_dot(q.data(), dir.idx.data(), dir.w.data(), dir.nnz());
            node = proj <= tree.cuts[node] ? 2 * node + 1 : 2 * node + 2;
            path_nodes[t * (limits.depth_max + 1) + lvl + 1] = node;
        }
    }

    for (std::uint32_t depth = limits.depth_min; depth <= limits.depth_max; ++depth) {
        std::fill(cumulative.begin(), cumulative.end(), 0);
        for (std::uint32_t t = 0; t < limits.t_max; ++t) {
            const Tree& tree = forest.trees[t];
            const auto [b, e] =
                tree.node_range(path_nodes[t * (limits.depth_max + 1) + depth]);
            for (std::uint32_t i = b; i < e; ++i) {
                const std::uint32_t p = tree.perm[i];
                if (members(p)) {
                    const std::uint16_t tally = ++votes[p];
                    if (tally <= limits.v_max) ++cumulative[tally - 1];
                }
            }
            std::uint64_t* cell = tensor.counts.data() + limits.cell_index(depth, t + 1, 1);
            for (std::uint32_t v = 0; v < limits.v_max; ++v) cell[v] = cumulative[v];
        }
        // reset tallies by replaying the ranges just visited
        for (std::uint32_t t = 0; t < limits.t_max; ++t) {
            const Tree& tree = forest.trees[t];
            const auto [b, e] =
                tree.node_range(path_nodes[t * (limits.depth_max + 1) + depth]);
            for (std::uint32_t i = b; i < e; ++i) votes[tree.perm[i]] = 0;
        }
    }
    return tensor;
}

namespace {

// Fused pass filling the true-neighbor tensor (A) and the whole-corpus tensor
// (B) from the same traversals; equivalent to two count_elected calls.
void count_elected_fused(const Forest& forest, const TuningLimits& limits,
                         std::span<const float> q, const std::vector<std::uint8_t>& is_truth,
                         std::vector<std::uint16_t>& votes, ElectionTensor& a_sum,
                         ElectionTensor& b_sum) {
    const std::uint32_t stride = limits.depth_max + 1;
    std::vector<std::uint32_t> path_nodes(std::size_t(limits.t_max) * stride);
    for (std::uint32_t t = 0; t < limits.t_max; ++t) {
        std::uint32_t node = 0;
        path_nodes[t * stride] = 0;
        for (std::uint32_t lvl = 0; lvl < limits.depth_max; ++lvl) {
            const Tree& tree = forest.trees[t];
            const Direction& dir = tree.direction_at(node, lvl);
            const float proj =
                kernels::sparse_dot(q.data(), dir.idx.data(), dir.w.data(), dir.nnz());
            node = proj <= tree.cuts[node] ? 2 * node + 1 : 2 * node + 2;
            path_nodes[t * stride + lvl + 1] = node;
        }
    }

    std::vector<std::uint64_t> cum_a(limits.v_max), cum_b(limits.v_max);
    for (std::uint32_t depth = limits.depth_min; depth <= limits.depth_max; ++depth) {
        std::fill(cum_a.begin(), cum_a.end(), 0);
        std::fill(cum_b.begin(), cum_b.end(), 0);
        for (std::uint32_t t = 0; t < limits.t_max; ++t) {
            const Tree& tree = forest.trees[t];
            const auto [b, e] = tree.node_range(path_nodes[t * stride + depth]);
            for (std::uint32_t i = b; i < e; ++i) {
                const std::uint32_t p = tree.perm[i];
                const std::uint16_t tally = ++votes[p];
                if (tally <= limits.v_max) {
                    ++cum_b[tally - 1];
                    cum_a[tally - 1] += is_truth[p];
                }
            }
            const std::size_t base = limits.cell_index(depth, t + 1, 1);
            for (std::uint32_t v = 0; v < limits.v_max; ++v) {
                a_sum.counts[base + v] += cum_a[v];
                b_sum.counts[base + v] += cum_b[v];
            }
        }
        for (std::uint32_t t = 0; t < limits.t_max; ++t) {
            const Tree& tree = forest.trees[t];
            const auto [b, e] = tree.node_range(path_nodes[t * stride + depth]);
            for (std::uint32_t i = b; i < e; ++i) votes[tree.perm[i]] = 0;
        }
    }
}

}  // namespace

TuningResult generate_index_auto(const DataMatrix& data, const DataMatrix& queries,
                                 std::uint32_t k, const TuningLimits& limits,
                                 const SplitRule& rule, const TimeModel& model,
                                 std::uint64_t seed) {
    if (queries.empty()) throw std::invalid_argument("generate_index_auto: no queries");
    if (queries.d != data.d) {
        throw std::invalid_argument("generate_index_auto: query dimension mismatch");
    }
    limits.validate(data.n);
    if (!model.fitted) throw std::invalid_argument("generate_index_auto: model not fitted");

    const auto t_total = Clock::now();
    TuningResult result;
    result.limits = limits;
    result.model = model;

    auto t0 = Clock::now();
    result.forest = grow_forest(data, limits.t_max, limits.depth_max, rule, seed);
    result.build_seconds = seconds_since(t0);

    t0 = Clock::now();
    const GroundTruth truth = compute_ground_truth(data, queries, k);
    result.truth_seconds = seconds_since(t0);

    t0 = Clock::now();
    const std::size_t m = std::size_t(queries.n);
    std::vector<ElectionTensor> a_parts, b_parts;
    const std::size_t workers = std::min(thread_count(), m);
    for (std::size_t w = 0; w < workers; ++w) {
        a_parts.emplace_back(limits);
        b_parts.emplace_back(limits);
    }
    parallel_chunks(m, [&](std::size_t worker, std::size_t lo, std::size_t hi) {
        std::vector<std::uint16_t> votes(std::size_t(data.n), 0);
        std::vector<std::uint8_t> is_truth(std::size_t(data.n), 0);
        for (std::size_t qi = lo; qi < hi; ++qi) {
            for (auto p : truth.rows[qi]) is_truth[p] = 1;
            count_elected_fused(result.forest, limits, queries.row_span(qi), is_truth, votes,
                                a_parts[worker], b_parts[worker]);
            for (auto p : truth.rows[qi]) is_truth[p] = 0;
        }
    });
    ElectionTensor a_sum(limits), b_sum(limits);
    for (std::size_t w = 0; w < workers; ++w) {
        a_sum.add(a_parts[w]);
        b_sum.add(b_parts[w]);
    }
    result.counting_seconds = seconds_since(t0);

    const std::size_t cells = limits.cell_count();
    result.recall_grid.resize(cells);
    result.candidate_grid.resize(cells);
    result.time_grid.resize(cells);
    const bool rkd = rule.variant == TreeType::RKD;
    for (std::uint32_t depth = limits.depth_min; depth <= limits.depth_max; ++depth) {
        for (std::uint32_t t = 1; t <= limits.t_max; ++t) {
            for (std::uint32_t v = 1; v <= limits.v_max; ++v) {
                const std::size_t c = limits.cell_index(depth, t, v);
                result.recall_grid[c] = double(a_sum.counts[c]) / (double(k) * double(m));
                result.candidate_grid[c] = double(b_sum.counts[c]) / double(m);
                result.time_grid[c] =
                    predict_time(model, t, depth, data.n, result.candidate_grid[c], rkd);
            }
        }
    }
    result.total_seconds = seconds_since(t_total);
    return result;
}

SelectedParams select_parameters(const TuningResult& result, const TuningTarget& target) {
    const TuningLimits& lim = result.limits;
    if (result.recall_grid.size() != lim.cell_count() || result.recall_grid.empty()) {
        throw std::invalid_argument("select_parameters: grids not populated");
    }

    struct Cell {
        std::uint32_t depth, t, v;
        double recall, time;
    };
    // tie order: lower time, then fewer trees, then deeper trees, then smaller v
    const auto tie_before = [](const Cell& a, const Cell& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.t != b.t) return a.t < b.t;
        if (a.depth != b.depth) return a.depth > b.depth;
        return a.v < b.v;
    };

    bool have_qualified = false, have_any = false;
    Cell best_qualified{}, fallback{};
    for (std::uint32_t depth = lim.depth_min; depth <= lim.depth_max; ++depth) {
        for (std::uint32_t t = 1; t <= lim.t_max; ++t) {
            for (std::uint32_t v = 1; v <= lim.v_max; ++v) {
                const std::size_t c = lim.cell_index(depth, t, v);
                const Cell cell{depth, t, v, result.recall_grid[c], result.time_grid[c]};
                if (target.kind == TuningTarget::Kind::Recall) {
                    if (cell.recall >= target.value &&
                        (!have_qualified || tie_before(cell, best_qualified))) {
                        best_qualified = cell;
                        have_qualified = true;
                    }
                    if (!have_any || cell.recall > fallback.recall ||
                        (cell.recall == fallback.recall && tie_before(cell, fallback))) {
                        fallback = cell;
                        have_any = true;
                    }
                } else {
                    if (cell.time <= target.value &&
                        (!have_qualified || cell.recall > best_qualified.recall ||
                         (cell.recall == best_qualified.recall &&
                          tie_before(cell, best_qualified)))) {
                        best_qualified = cell;
                        have_qualified = true;
                    }
                    if (!have_any || tie_before(cell, fallback)) {
                        fallback = cell;
                        have_any = true;
                    }
                }
            }
        }
    }

    const Cell& chosen = have_qualified ? best_qualified : fallback;
    SelectedParams out;
    out.num_trees = chosen.t;
    out.depth = chosen.depth;
    out.vote_threshold = chosen.v;
    out.est_recall = chosen.recall;
    out.est_time = chosen.time;
    out.target_met = have_qualified;
    return out;
}

std::string tuning_result_to_json(const TuningResult& result, const SelectedParams* selected) {
    nlohmann::json j;
    j["limits"] = {{"t_max", result.limits.t_max},
                   {"depth_min", result.limits.depth_min},
                   {"depth_max", result.limits.depth_max},
                   {"v_max", result.limits.v_max},
                   {"k", result.limits.k}};
    j["grid_order"] = "depth,trees,votes";
    j["recall_grid"] = result.recall_grid;
    j["candidate_grid"] = result.candidate_grid;
    j["time_grid"] = result.time_grid;
    j["model"] = nlohmann::json::parse(time_model_to_json(result.model));
    j["timings"] = {{"build_seconds", result.build_seconds},
                    {"truth_seconds", result.truth_seconds},
                    {"counting_seconds", result.counting_seconds},
                    {"total_seconds", result.total_seconds}};
    if (selected != nullptr) {
        j["selected"] = {{"trees", selected->num_trees},
                         {"depth", selected->depth},
                         {"vote_threshold", selected->vote_threshold},
                         {"est_recall", selected->est_recall},
                         {"est_time", selected->est_time},
                         {"target_met", selected->target_met}};
    }
    return j.dump(2);
}

void save_tuning_report(const std::filesystem::path& path, const TuningResult& result,
                        const SelectedParams* selected) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << tuning_result_to_json(result, selected) << '\n';
}

void save_grid_csv(const std::filesystem::path& path, const TuningResult& result) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "depth,trees,votes,est_recall,mean_candidates,est_time_s\n";
    const TuningLimits& lim = result.limits;
    for (std::uint32_t depth = lim.depth_min; depth <= lim.depth_max; ++depth) {
        for (std::uint32_t t = 1; t <= lim.t_max; ++t) {
            for (std::uint32_t v = 1; v <= lim.v_max; ++v) {
                const std::size_t c = lim.cell_index(depth, t, v);
                out << depth << ',' << t << ',' << v << ',' << result.recall_grid[c] << ','
                    << result.candidate_grid[c] << ',' << result.time_grid[c] << '\n';
            }
        }
    }
}

}  // namespace frann
