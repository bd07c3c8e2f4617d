#pragma once
// Query-time prediction: the per-query cost decomposes into projection,
// voting and final distance computation, each approximately linear in a known
// load measure (T*depth projected vectors, T*n0 vote increments, |S| distance
// evaluations). Each component is measured by a designed micro-experiment and
// fit with the Theil-Sen estimator, which shrugs off scheduler outliers.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace frann {

struct LinearFit {
    double intercept = 0.0;  // seconds
    double slope = 0.0;      // seconds per unit of the predictor

    double at(double x) const { return intercept + slope * x; }
};

// slope = median of all pairwise slopes (x_i != x_j); intercept = median of
// y_i - slope*x_i; an even count takes the mean of the two central values.
// Throws std::invalid_argument with < 2 points or all x identical.
LinearFit theil_sen(std::span<const std::pair<double, double>> points);

struct TimeModel {
    LinearFit projection;  // over z = T * depth
    LinearFit voting;      // over y = T * n0
    LinearFit distance;    // over |S|
    std::uint32_t d = 0;
    bool fitted = false;
    std::string timestamp;
};

using TimingPoints = std::vector<std::pair<double, double>>;

// Seconds to multiply one d-vector by a sparse matrix with `rows` rows of the
// given sparsity, for each requested size; `repetitions` samples per size are
// kept as individual points. A warm-up round is discarded.
TimingPoints measure_projection_times(std::uint32_t d, double sparsity,
                                      std::span<const std::uint64_t> rows,
                                      std::uint32_t repetitions);

// Seconds to apply `increments` vote increments (with threshold test and
// touched-list reset) against a counter array of the given size.
TimingPoints measure_voting_times(std::uint64_t counter_size,
                                  std::span<const std::uint64_t> increments,
                                  std::uint32_t repetitions);

// Seconds to evaluate distances from one d-vector to `count` d-vectors.
TimingPoints measure_distance_times(std::uint32_t d, std::span<const std::uint64_t> counts,
                                    std::uint32_t repetitions);

struct MicroBenchPlan {
    std::uint32_t rungs = 8;        // geometric ladder size per component
    std::uint32_t repetitions = 5;  // samples per rung
    std::uint64_t z_min = 1, z_max = 1;  // projected-vector counts
    std::uint64_t y_min = 1, y_max = 1;  // vote-increment counts
    std::uint64_t s_min = 1, s_max = 1;  // candidate-set sizes
    std::uint64_t counter_size = 1;      // corpus size n
    double sparsity = 0.0;               // 0 = 1/sqrt(d)
};

// Runs all three micro-experiments and fits them. Single-threaded by design;
// negative fitted slopes are only warned about on stderr.
TimeModel fit_time_model(std::uint32_t d, const MicroBenchPlan& plan);

// Expected seconds per query: projection term (omitted for RKD trees, whose
// projections are single-coordinate reads) + voting term at y = T*ceil(n/2^depth)
// + distance term at the mean candidate-set size.
double predict_time(const TimeModel& model, std::uint32_t num_trees, std::uint32_t depth,
                    std::uint64_t n, double mean_candidates, bool rkd);

std::string time_model_to_json(const TimeModel& model);
TimeModel time_model_from_json(const std::string& text);
void save_time_model(const std::filesystem::path& path, const TimeModel& model);
TimeModel load_time_model(const std::filesystem::path& path);

// Geometric ladder of `rungs` distinct integers spanning [lo, hi].
std::vector<std::uint64_t> geometric_ladder(std::uint64_t lo, std::uint64_t hi,
                                            std::uint32_t rungs);

}  // namespace frann
