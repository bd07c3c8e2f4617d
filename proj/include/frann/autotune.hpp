#pragma once
// Hyperparameter autotuning for voting search. One maximal forest (T_max
// trees, depth_max levels) is built; replaying each validation query once
// yields, for every lattice cell (depth, tree count, vote threshold), the
// number of elected true neighbors and the candidate-set size. Those counts
// give recall estimates and, through the time model, expected query times for
// the whole lattice, from which the optimum for a recall or time target is a
// table lookup. The tuned index is a subset of the already-built forest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "frann/dataset.hpp"
#include "frann/timemodel.hpp"
#include "frann/trees.hpp"

namespace frann {

struct TuningLimits {
    std::uint32_t t_max = 64;
    std::uint32_t depth_min = 1;  // shallowest tuned level
    std::uint32_t depth_max = 1;  // forest build depth
    std::uint32_t v_max = 64;     // = t_max unless overridden
    std::uint32_t k = 10;

    // depth_max = floor(log2 n), depth_min bounds leaves near 256 points,
    // v_max = t_max.
    static TuningLimits defaults_for(std::uint64_t n, std::uint32_t k,
                                     std::uint32_t t_max = 64);

    void validate(std::uint64_t n) const;  // throws std::invalid_argument

    std::uint32_t depth_count() const { return depth_max - depth_min + 1; }
    std::size_t cell_count() const {
        return std::size_t(depth_count()) * t_max * v_max;
    }
    // flattened (depth, T, v) order; depth/T/v are the actual values
    std::size_t cell_index(std::uint32_t depth, std::uint32_t num_trees,
                           std::uint32_t v) const {
        return (std::size_t(depth - depth_min) * t_max + (num_trees - 1)) * v_max + (v - 1);
    }
};

// Per-query election counts over the lattice: entry (depth, T, v) is the
// number of member points sharing a leaf with the query in >= v of the first
// T trees at that depth.
struct ElectionTensor {
    TuningLimits limits;
    std::vector<std::uint64_t> counts;

    explicit ElectionTensor(const TuningLimits& lim)
        : limits(lim), counts(lim.cell_count(), 0) {}

    std::uint64_t at(std::uint32_t depth, std::uint32_t num_trees, std::uint32_t v) const {
        return counts[limits.cell_index(depth, num_trees, v)];
    }
    void add(const ElectionTensor& other) {
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    }
};

// One tree's contribution at one level (Algorithm 3's count-votes): bumps the
// tally of every member point in q's node and returns, per v, how many points
// reached tally exactly v during this call. `votes` carries tallies across the
// trees of one level and must be zeroed between levels.
std::vector<std::uint32_t> count_votes(const Tree& tree, std::uint32_t level,
                                       std::span<const float> q,
                                       const std::function<bool(std::uint32_t)>& members,
                                       std::vector<std::uint16_t>& votes, std::uint32_t v_max);

// Full election tensor for one query (Algorithm 3's count-elected): one pass
// over the trees per level with a running cumulative vector, so counting the
// whole lattice costs little more than counting (T_max, depth) alone.
ElectionTensor count_elected(const Forest& forest, const TuningLimits& limits,
                             std::span<const float> q,
                             const std::function<bool(std::uint32_t)>& members);

struct TuningResult {
    TuningLimits limits;
    std::vector<double> recall_grid;     // mean elected true neighbors / k
    std::vector<double> candidate_grid;  // mean candidate-set size
    std::vector<double> time_grid;       // predicted seconds per query
    Forest forest;                       // the maximal forest, ready for subsetting
    TimeModel model;

    // wall-clock breakdown, for overhead accounting
    double build_seconds = 0.0;
    double truth_seconds = 0.0;
    double counting_seconds = 0.0;
    double total_seconds = 0.0;

    double recall_at(std::uint32_t depth, std::uint32_t t, std::uint32_t v) const {
        return recall_grid[limits.cell_index(depth, t, v)];
    }
    double candidates_at(std::uint32_t depth, std::uint32_t t, std::uint32_t v) const {
        return candidate_grid[limits.cell_index(depth, t, v)];
    }
    double time_at(std::uint32_t depth, std::uint32_t t, std::uint32_t v) const {
        return time_grid[limits.cell_index(depth, t, v)];
    }
};

// Algorithm 2: grows the maximal forest, replays the validation queries
// (concurrently, with per-thread partial tensors merged by addition) and
// fills all three grids. The true-neighbor and whole-corpus tensors are
// counted in one fused pass per query.
TuningResult generate_index_auto(const DataMatrix& data, const DataMatrix& queries,
                                 std::uint32_t k, const TuningLimits& limits,
                                 const SplitRule& rule, const TimeModel& model,
                                 std::uint64_t seed);

struct TuningTarget {
    enum class Kind { Recall, Time };
    Kind kind = Kind::Recall;
    double value = 0.9;  // recall in (0,1) or seconds per query
};

struct SelectedParams {
    std::uint32_t num_trees = 0;
    std::uint32_t depth = 0;
    std::uint32_t vote_threshold = 0;
    double est_recall = 0.0;
    double est_time = 0.0;
    bool target_met = false;
};

// Recall target: cheapest cell with estimated recall >= e, or the max-recall
// cell flagged unmet. Time target: most accurate cell with estimated time
// <= t, or the min-time cell flagged unmet. Ties break toward lower time,
// then fewer trees, then deeper trees, then smaller vote threshold.
SelectedParams select_parameters(const TuningResult& result, const TuningTarget& target);

std::string tuning_result_to_json(const TuningResult& result, const SelectedParams* selected);
void save_tuning_report(const std::filesystem::path& path, const TuningResult& result,
                        const SelectedParams* selected);
void save_grid_csv(const std::filesystem::path& path, const TuningResult& result);

}  // namespace frann
