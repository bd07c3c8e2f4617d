#include "frann/timemodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "frann/kernels.hpp"
#include "frann/rng.hpp"
#include "frann/trees.hpp"

namespace frann {

namespace {

double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

LinearFit theil_sen(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("theil_sen: need at least 2 points");
    std::vector<double> slopes;
    slopes.reserve(points.size() * (points.size() - 1) / 2);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double dx = points[j].first - points[i].first;
            if (dx != 0.0) slopes.push_back((points[j].second - points[i].second) / dx);
        }
    }
    if (slopes.empty()) throw std::invalid_argument("theil_sen: all x values identical");
    LinearFit fit;
    fit.slope = median_inplace(slopes);
    std::vector<double> residuals;
    residuals.reserve(points.size());
    for (const auto& [x, y] : points) residuals.push_back(y - fit.slope * x);
    fit.intercept = median_inplace(residuals);
    return fit;
}

namespace {

volatile double g_sink = 0.0;  // keeps measured loops from being optimized out

using Clock = std::chrono::steady_clock;

// Seconds per invocation of fn, with the invocation count auto-scaled so one
// sample stays above clock noise. One warm-up call is discarded.
template <typename Fn>
TimingPoints measure_ladder(std::span<const std::uint64_t> sizes, std::uint32_t repetitions,
                            Fn&& fn) {
    constexpr double kMinSample = 50e-6;
    TimingPoints out;
    out.reserve(sizes.size() * repetitions);
    for (const auto size : sizes) {
        fn(size);  // warm-up, discarded
        std::uint64_t inner = 1;
        for (;;) {
            const auto t0 = Clock::now();
            for (std::uint64_t r = 0; r < inner; ++r) fn(size);
            const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
            if (elapsed >= kMinSample || inner >= (1ULL << 24)) break;
            inner *= 2;
        }
        for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
            const auto t0 = Clock::now();
            for (std::uint64_t r = 0; r < inner; ++r) fn(size);
            const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
            out.emplace_back(double(size), elapsed / double(inner));
        }
    }
    return out;
}

}  // namespace

TimingPoints measure_projection_times(std::uint32_t d, double sparsity,
                                      std::span<const std::uint64_t> rows,
                                      std::uint32_t repetitions) {
    if (rows.size() < 2) throw std::invalid_argument("measure_projection_times: need >= 2 sizes");
    SplitRule rule;
    rule.sparsity = sparsity;
    const std::uint32_t nnz = rule.rp_nonzeros(d);
    const std::uint64_t max_rows = *std::max_element(rows.begin(), rows.end());

    Rng rng(0x50524f4aULL);
    std::vector<std::uint32_t> idx;
    std::vector<float> w;
    idx.reserve(max_rows * nnz);
    w.reserve(max_rows * nnz);
    for (std::uint64_t r = 0; r < max_rows; ++r) {
        const auto row_idx = rng.sample_distinct(nnz, d);
        idx.insert(idx.end(), row_idx.begin(), row_idx.end());
        for (std::uint32_t j = 0; j < nnz; ++j) w.push_back(float(rng.normal()));
    }
    std::vector<float> x(d);
    for (auto& v : x) v = float(rng.normal());

    return measure_ladder(rows, repetitions, [&](std::uint64_t z) {
        float acc = 0.0f;
        for (std::uint64_t r = 0; r < z; ++r) {
            acc += kernels::sparse_dot(x.data(), idx.data() + r * nnz, w.data() + r * nnz, nnz);
        }
        g_sink = g_sink + acc;
    });
}

TimingPoints measure_voting_times(std::uint64_t counter_size,
                                  std::span<const std::uint64_t> increments,
                                  std::uint32_t repetitions) {
    if (increments.size() < 2) {
        throw std::invalid_argument("measure_voting_times: need >= 2 sizes");
    }
    // real vote counting walks contiguous leaf ranges, so the simulation
    // increments runs of counters from pseudo-random starts and then clears
    // them again (the touched-list reset queries also pay for)
    constexpr std::uint64_t kRun = 256;
    std::vector<std::uint16_t> votes(counter_size, 0);
    Rng rng(0x564f5445ULL);
    std::vector<std::uint64_t> starts(4096);
    for (auto& s : starts) s = rng.uniform(std::max<std::uint64_t>(1, counter_size));

    return measure_ladder(increments, repetitions, [&](std::uint64_t y) {
        std::uint64_t done = 0;
        std::size_t cursor = 0;
        std::uint64_t hits = 0;
        while (done < y) {
            const std::uint64_t run = std::min(kRun, y - done);
            const std::uint64_t start = starts[cursor++ % starts.size()];
            for (std::uint64_t i = 0; i < run; ++i) {
                const std::uint64_t p = (start + i) % counter_size;
                if (++votes[p] >= 2) ++hits;
            }
            done += run;
        }
        // reset via the same runs
        done = 0;
        cursor = 0;
        while (done < y) {
            const std::uint64_t run = std::min(kRun, y - done);
            const std::uint64_t start = starts[cursor++ % starts.size()];
            for (std::uint64_t i = 0; i < run; ++i) votes[(start + i) % counter_size] = 0;
            done += run;
        }
        g_sink = g_sink + double(hits);
    });
}

TimingPoints measure_distance_times(std::uint32_t d, std::span<const std::uint64_t> counts,
                                    std::uint32_t repetitions) {
    if (counts.size() < 2) throw std::invalid_argument("measure_distance_times: need >= 2 sizes");
    const std::uint64_t max_count = *std::max_element(counts.begin(), counts.end());
    Rng rng(0x44495354ULL);
    std::vector<float> corpus(max_count * d);
    for (auto& v : corpus) v = float(rng.normal());
    std::vector<float> q(d);
    for (auto& v : q) v = float(rng.normal());

    return measure_ladder(counts, repetitions, [&](std::uint64_t s) {
        float acc = 0.0f;
        for (std::uint64_t i = 0; i < s; ++i) {
            acc += kernels::l2_sq(corpus.data() + i * d, q.data(), d);
        }
        g_sink = g_sink + acc;
    });
}

std::vector<std::uint64_t> geometric_ladder(std::uint64_t lo, std::uint64_t hi,
                                            std::uint32_t rungs) {
    lo = std::max<std::uint64_t>(lo, 1);
    hi = std::max(hi, lo);
    std::vector<std::uint64_t> out;
    if (rungs <= 1 || lo == hi) {
        out.push_back(lo);
        if (hi != lo) out.push_back(hi);
        return out;
    }
    const double ratio = std::pow(double(hi) / double(lo), 1.0 / double(rungs - 1));
    double value = double(lo);
    for (std::uint32_t r = 0; r < rungs; ++r) {
        const auto v = std::uint64_t(std::llround(value));
        if (out.empty() || v > out.back()) out.push_back(v);
        value *= ratio;
    }
    if (out.back() != hi) out.push_back(hi);
    return out;
}

TimeModel fit_time_model(std::uint32_t d, const MicroBenchPlan& plan) {
    TimeModel model;
    model.d = d;

    const auto zs = geometric_ladder(plan.z_min, plan.z_max, plan.rungs);
    const auto ys = geometric_ladder(plan.y_min, plan.y_max, plan.rungs);
    const auto ss = geometric_ladder(plan.s_min, plan.s_max, plan.rungs);

    model.projection =
        theil_sen(measure_projection_times(d, plan.sparsity, zs, plan.repetitions));
    model.voting =
        theil_sen(measure_voting_times(plan.counter_size, ys, plan.repetitions));
    model.distance = theil_sen(measure_distance_times(d, ss, plan.repetitions));
    model.fitted = true;

    const auto warn_if_negative = [](const char* name, const LinearFit& fit) {
        if (fit.slope < 0.0) {
            std::cerr << "warning: " << name << " time fit has negative slope (" << fit.slope
                      << "); the machine is likely too noisy for reliable estimates\n";
        }
    };
    warn_if_negative("projection", model.projection);
    warn_if_negative("voting", model.voting);
    warn_if_negative("distance", model.distance);

    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    model.timestamp = buf;
    return model;
}

double predict_time(const TimeModel& model, std::uint32_t num_trees, std::uint32_t depth,
                    std::uint64_t n, double mean_candidates, bool rkd) {
    if (!model.fitted) throw std::invalid_argument("predict_time: model is not fitted");
    const double n0 = std::ceil(double(n) / double(std::uint64_t(1) << depth));
    double total = model.voting.at(double(num_trees) * n0) + model.distance.at(mean_candidates);
    if (!rkd) {
        total += model.projection.at(double(num_trees) * double(depth));
    }
    return total;
}

std::string time_model_to_json(const TimeModel& model) {
    nlohmann::json j;
    j["projection"] = {{"intercept", model.projection.intercept}, {"slope", model.projection.slope}};
    j["voting"] = {{"intercept", model.voting.intercept}, {"slope", model.voting.slope}};
    j["distance"] = {{"intercept", model.distance.intercept}, {"slope", model.distance.slope}};
    j["d"] = model.d;
    j["timestamp"] = model.timestamp;
    return j.dump(2);
}

TimeModel time_model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    TimeModel model;
    const auto read = [&j](const char* key) {
        return LinearFit{j.at(key).at("intercept").get<double>(),
                         j.at(key).at("slope").get<double>()};
    };
    model.projection = read("projection");
    model.voting = read("voting");
    model.distance = read("distance");
    model.d = j.at("d").get<std::uint32_t>();
    model.timestamp = j.value("timestamp", "");
    model.fitted = true;
    return model;
}

void save_time_model(const std::filesystem::path& path, const TimeModel& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << time_model_to_json(model) << '\n';
}

TimeModel load_time_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return time_model_from_json(text);
}

}  // namespace frann
