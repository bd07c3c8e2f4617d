// frann: build, tune and query forest-based approximate nearest neighbor
// indexes. Verbs: groundtruth, build, autotune, query, bench, inspect.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frann/autotune.hpp"
#include "frann/dataset.hpp"
#include "frann/forest_io.hpp"
#include "frann/search.hpp"
#include "frann/synth.hpp"
#include "frann/timemodel.hpp"
#include "frann/trees.hpp"

namespace {

using namespace frann;
using Clock = std::chrono::steady_clock;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --data accepts a file path or "synth:fixture" / "synth:n=...,d=...,clusters=...,seed=..."
DataMatrix load_data_arg(const std::string& spec, const std::string& format_flag) {
    if (spec.rfind("synth:", 0) == 0) {
        const std::string body = spec.substr(6);
        if (body == "fixture") return make_fixture();
        std::uint64_t n = 10000, d = 64, seed = 0xF1D0;
        std::uint32_t clusters = 20;
        std::stringstream ss(body);
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("bad synth spec item '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            const std::uint64_t value = std::stoull(kv.substr(eq + 1));
            if (key == "n") n = value;
            else if (key == "d") d = value;
            else if (key == "clusters") clusters = std::uint32_t(value);
            else if (key == "seed") seed = value;
            else throw UsageError("unknown synth key '" + key + "'");
        }
        return make_gaussian_mixture(n, d, clusters, seed);
    }
    const FileFormat format =
        format_flag.empty() ? format_from_extension(spec) : parse_format(format_flag);
    return load_vectors(spec, format);
}

SplitRule make_rule(const std::string& tree, std::uint32_t m_top, double sparsity,
                    std::uint32_t pca_dims, std::uint32_t pca_iterations, bool rp_per_node) {
    SplitRule rule;
    rule.variant = parse_tree_type(tree);
    rule.m_top = m_top;
    rule.sparsity = sparsity;
    rule.pca_dims = pca_dims;
    rule.pca_iterations = pca_iterations;
    rule.rp_shared_levels = !rp_per_node;
    return rule;
}

TuningTarget parse_target(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw UsageError("target must be recall=<e> or time=<t>[s|ms|us]");
    }
    const std::string kind = spec.substr(0, eq);
    std::string value = spec.substr(eq + 1);
    TuningTarget target;
    if (kind == "recall") {
        target.kind = TuningTarget::Kind::Recall;
        target.value = std::stod(value);
        if (!(target.value > 0.0 && target.value < 1.0)) {
            throw UsageError("target recall must lie in (0, 1)");
        }
    } else if (kind == "time") {
        target.kind = TuningTarget::Kind::Time;
        double scale = 1.0;
        if (value.size() > 2 && value.substr(value.size() - 2) == "ms") {
            scale = 1e-3;
            value.resize(value.size() - 2);
        } else if (value.size() > 2 && value.substr(value.size() - 2) == "us") {
            scale = 1e-6;
            value.resize(value.size() - 2);
        } else if (!value.empty() && value.back() == 's') {
            value.pop_back();
        }
        target.value = std::stod(value) * scale;
        if (target.value <= 0.0) throw UsageError("target time must be positive");
    } else {
        throw UsageError("unknown target kind '" + kind + "'");
    }
    return target;
}

MicroBenchPlan plan_for(const TuningLimits& limits, std::uint64_t n, double sparsity) {
    MicroBenchPlan plan;
    plan.z_min = limits.depth_min;
    plan.z_max = std::uint64_t(limits.t_max) * limits.depth_max;
    const auto leaf = [&](std::uint32_t depth) {
        return std::uint64_t(std::ceil(double(n) / double(std::uint64_t(1) << depth)));
    };
    plan.y_min = leaf(limits.depth_max);
    plan.y_max = std::uint64_t(limits.t_max) * leaf(limits.depth_min);
    plan.s_min = limits.k;
    plan.s_max = n;
    plan.counter_size = n;
    plan.sparsity = sparsity;
    return plan;
}

void check_index_matches(const IndexInfo& info, const DataMatrix& data) {
    if (info.n != data.n || info.d != data.d || info.data_checksum != corpus_checksum(data)) {
        throw std::runtime_error("index does not match this corpus (n/d/checksum mismatch)");
    }
}

double timed_batch_seconds(const Forest& forest, const DataMatrix& data,
                           const DataMatrix& queries, const SearchParams& params,
                           std::uint32_t passes) {
    std::size_t sink = 0;
    // warm-up
    for (std::uint64_t i = 0; i < queries.n; ++i) {
        sink += run_query(forest, data, queries.row_span(i), params).size();
    }
    std::vector<double> per_pass;
    for (std::uint32_t p = 0; p < passes; ++p) {
        const auto t0 = Clock::now();
        for (std::uint64_t i = 0; i < queries.n; ++i) {
            sink += run_query(forest, data, queries.row_span(i), params).size();
        }
        per_pass.push_back(seconds_since(t0) / double(queries.n));
    }
    std::sort(per_pass.begin(), per_pass.end());
    if (sink == SIZE_MAX) std::cerr << "";  // keep the loops live
    return per_pass[per_pass.size() / 2];
}

double mean_recall(const Forest& forest, const DataMatrix& data, const DataMatrix& queries,
                   const GroundTruth& truth, const SearchParams& params) {
    double total = 0.0;
    for (std::uint64_t i = 0; i < queries.n; ++i) {
        const auto result = run_query(forest, data, queries.row_span(i), params);
        total += recall_of(result, truth.rows[i]);
    }
    return total / double(queries.n);
}

std::vector<std::uint32_t> parse_uint_list(const std::string& csv) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::uint32_t(std::stoul(cell)));
    return out;
}

// grid spec: "T=1,2,4;l=6,8;v=1,2;b=0,16"
struct BenchGrid {
    std::vector<std::uint32_t> trees{8};
    std::vector<std::uint32_t> depths{8};
    std::vector<std::uint32_t> votes{1};
    std::vector<std::uint32_t> branches{0};
};

BenchGrid parse_grid(const std::string& spec) {
    BenchGrid grid;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw UsageError("bad grid item '" + part + "'");
        const std::string key = part.substr(0, eq);
        const auto values = parse_uint_list(part.substr(eq + 1));
        if (values.empty()) throw UsageError("empty grid list for '" + key + "'");
        if (key == "T") grid.trees = values;
        else if (key == "l") grid.depths = values;
        else if (key == "v") grid.votes = values;
        else if (key == "b") grid.branches = values;
        else throw UsageError("unknown grid key '" + key + "'");
    }
    return grid;
}

// ---------------------------------------------------------------------------

struct GroundtruthArgs {
    std::string data, format, queries, queries_format, split, out;
    std::uint32_t k = 10;
    std::uint64_t seed = 1;
    std::string out_train, out_queries;
};

int cmd_groundtruth(const GroundtruthArgs& args) {
    if (args.k < 1) throw UsageError("--k must be >= 1");
    if (args.queries.empty() == args.split.empty()) {
        throw UsageError("exactly one of --queries or --split is required");
    }
    DataMatrix corpus = load_data_arg(args.data, args.format);
    DataMatrix queries;
    if (!args.queries.empty()) {
        queries = load_data_arg(args.queries, args.queries_format);
    } else {
        const auto comma = args.split.find(',');
        if (comma == std::string::npos) throw UsageError("--split expects MVAL,MTEST");
        const std::uint64_t m_val = std::stoull(args.split.substr(0, comma));
        const std::uint64_t m_test = std::stoull(args.split.substr(comma + 1));
        QuerySplit split = split_queries(corpus, m_val, m_test, args.seed);
        queries = std::move(split.test);
        corpus = std::move(split.train);
        if (!args.out_train.empty()) save_raw_f32(args.out_train, corpus);
        if (!args.out_queries.empty()) save_raw_f32(args.out_queries, queries);
    }
    if (args.k > corpus.n) throw UsageError("--k exceeds corpus size");
    const GroundTruth truth = compute_ground_truth(corpus, queries, args.k);
    save_ground_truth_csv(args.out, truth);
    std::cout << "wrote " << truth.rows.size() << " rows of " << args.k << " neighbors to "
              << args.out << "\n";
    return 0;
}

struct BuildArgs {
    std::string data, format, tree = "rp", out;
    std::uint32_t trees = 16, depth = 0, m_top = 5, pca_dims = 0, pca_iterations = 20;
    double sparsity = 0.0;
    bool rp_per_node = false;
    std::uint64_t seed = 1;
};

int cmd_build(const BuildArgs& args) {
    const DataMatrix data = load_data_arg(args.data, args.format);
    const auto max_depth = std::uint32_t(std::floor(std::log2(double(data.n))));
    std::uint32_t depth = args.depth;
    if (depth == 0) depth = max_depth > 7 ? max_depth - 7 : 1;  // leaves near 128 points
    const SplitRule rule = make_rule(args.tree, args.m_top, args.sparsity, args.pca_dims,
                                     args.pca_iterations, args.rp_per_node);
    const auto t0 = Clock::now();
    const Forest forest = grow_forest(data, args.trees, depth, rule, args.seed);
    const double build_s = seconds_since(t0);
    save_forest(args.out, forest);
    std::cout << "built " << args.trees << " " << args.tree << " trees of depth " << depth
              << " over " << data.n << " points in " << std::fixed << std::setprecision(2)
              << build_s << " s -> " << args.out << "\n";
    return 0;
}

struct AutotuneArgs {
    std::string data, format, tree = "rp", target = "recall=0.9", out, report, grid_csv;
    std::string out_corpus, out_queries, model_in, model_out;
    std::uint32_t k = 10, t_max = 32, depth_min = 0, depth_max = 0;
    std::uint64_t m_val = 100, seed = 1;
    std::uint32_t m_top = 5, pca_dims = 0, pca_iterations = 20;
    double sparsity = 0.0;
    bool rp_per_node = false, include_queries = false;
};

int cmd_autotune(const AutotuneArgs& args) {
    const TuningTarget target = parse_target(args.target);
    if (args.k < 1) throw UsageError("--k must be >= 1");
    DataMatrix corpus = load_data_arg(args.data, args.format);
    DataMatrix queries;
    {
        QuerySplit split = split_queries(corpus, args.m_val, 0, args.seed);
        queries = std::move(split.validation);
        if (!args.include_queries) corpus = std::move(split.train);
    }
    // the index refers to the (possibly reduced) tuning corpus, so offer to
    // persist it for later query runs
    if (!args.out_corpus.empty()) save_raw_f32(args.out_corpus, corpus);
    if (!args.out_queries.empty()) save_raw_f32(args.out_queries, queries);

    TuningLimits limits = TuningLimits::defaults_for(corpus.n, args.k, args.t_max);
    if (args.depth_min > 0) limits.depth_min = args.depth_min;
    if (args.depth_max > 0) limits.depth_max = args.depth_max;
    limits.validate(corpus.n);

    const SplitRule rule = make_rule(args.tree, args.m_top, args.sparsity, args.pca_dims,
                                     args.pca_iterations, args.rp_per_node);
    const double sparsity_for_model =
        rule.sparsity > 0.0 ? rule.sparsity : 1.0 / std::sqrt(double(corpus.d));
    const TimeModel model =
        args.model_in.empty()
            ? fit_time_model(std::uint32_t(corpus.d),
                             plan_for(limits, corpus.n, sparsity_for_model))
            : load_time_model(args.model_in);
    if (!args.model_out.empty()) save_time_model(args.model_out, model);

    const TuningResult result =
        generate_index_auto(corpus, queries, args.k, limits, rule, model, args.seed);
    const SelectedParams selected = select_parameters(result, target);

    Forest tuned = subset_index(result.forest, selected.num_trees, selected.depth);
    tuned.default_vote_threshold = selected.vote_threshold;
    if (!args.out.empty()) save_forest(args.out, tuned);
    if (!args.report.empty()) save_tuning_report(args.report, result, &selected);
    if (!args.grid_csv.empty()) save_grid_csv(args.grid_csv, result);

    std::cout << "selected trees=" << selected.num_trees << " depth=" << selected.depth
              << " votes=" << selected.vote_threshold << "\n"
              << std::fixed << std::setprecision(3) << "estimated recall " << selected.est_recall
              << ", estimated query time " << std::setprecision(1)
              << selected.est_time * 1e6 << " us\n"
              << std::setprecision(2) << "tuning took " << result.total_seconds
              << " s (forest build " << result.build_seconds << " s, ground truth "
              << result.truth_seconds << " s, counting " << result.counting_seconds << " s)\n";
    if (!selected.target_met) {
        std::cout << "warning: target " << args.target << " not attainable; returned the "
                  << (target.kind == TuningTarget::Kind::Recall ? "max-recall" : "min-time")
                  << " configuration\n";
    }
    return 0;
}

struct QueryArgs {
    std::string index, data, format, queries, queries_format, truth, strategy;
    std::uint32_t k = 10, v = 0, b = 0, repeats = 3;
};

int cmd_query(const QueryArgs& args) {
    if (args.k < 1) throw UsageError("--k must be >= 1");
    const DataMatrix data = load_data_arg(args.data, args.format);
    const IndexInfo info = read_index_info(args.index);
    check_index_matches(info, data);
    const Forest forest = load_forest(args.index);
    const DataMatrix queries = load_data_arg(args.queries, args.queries_format);
    if (queries.d != data.d) throw std::runtime_error("query dimensionality mismatch");

    SearchParams params;
    params.k = args.k;
    if (args.strategy.empty() || args.strategy == "voting") {
        params.strategy = SearchParams::Strategy::Voting;
        params.vote_threshold = args.v > 0 ? args.v
                                : forest.default_vote_threshold > 0
                                    ? forest.default_vote_threshold
                                    : 1;
    } else if (args.strategy == "pq") {
        params.strategy = SearchParams::Strategy::PriorityQueue;
        params.extra_branches = args.b;
    } else {
        throw UsageError("--strategy must be voting or pq");
    }

    for (std::uint64_t i = 0; i < queries.n; ++i) {
        const auto result = run_query(forest, data, queries.row_span(i), params);
        for (std::size_t j = 0; j < result.size(); ++j) {
            if (j) std::cout << ' ';
            std::cout << result[j];
        }
        std::cout << '\n';
    }

    if (!args.truth.empty()) {
        const GroundTruth truth = load_ground_truth_csv(args.truth);
        if (truth.rows.size() != queries.n) {
            throw std::runtime_error("ground truth row count does not match query count");
        }
        const double recall = mean_recall(forest, data, queries, truth, params);
        const double per_query =
            timed_batch_seconds(forest, data, queries, params, std::max(3u, args.repeats));
        std::cout << std::fixed << std::setprecision(3) << "mean recall: " << recall << "\n"
                  << std::setprecision(1) << "mean query time: " << per_query * 1e6 << " us\n";
    }
    return 0;
}

struct BenchArgs {
    std::string data, format, tree = "rp", grid, strategies = "voting,pq", out,
                out_format = "csv";
    std::uint32_t k = 10;
    std::uint64_t m_test = 100, seed = 1;
    std::uint32_t m_top = 5, pca_dims = 0, pca_iterations = 20;
    double sparsity = 0.0;
};

struct BenchRow {
    std::string tree_type, strategy;
    std::uint32_t trees, depth, knob;  // knob: v for voting, b for pq
    double recall, query_seconds, build_seconds, tuning_seconds;
};

int cmd_bench(const BenchArgs& args) {
    const BenchGrid grid = parse_grid(args.grid);
    DataMatrix corpus = load_data_arg(args.data, args.format);
    QuerySplit split = split_queries(corpus, 0, args.m_test, args.seed);
    const DataMatrix queries = std::move(split.test);
    corpus = std::move(split.train);
    const GroundTruth truth = compute_ground_truth(corpus, queries, args.k);

    std::vector<std::string> strategies;
    {
        std::stringstream ss(args.strategies);
        std::string cell;
        while (std::getline(ss, cell, ',')) strategies.push_back(cell);
    }

    const SplitRule rule =
        make_rule(args.tree, args.m_top, args.sparsity, args.pca_dims, args.pca_iterations, false);
    const std::uint32_t t_max = *std::max_element(grid.trees.begin(), grid.trees.end());
    const std::uint32_t depth_max = *std::max_element(grid.depths.begin(), grid.depths.end());
    const auto t0 = Clock::now();
    const Forest maximal = grow_forest(corpus, t_max, depth_max, rule, args.seed);
    const double build_s = seconds_since(t0);

    std::vector<BenchRow> rows;
    for (const auto t : grid.trees) {
        for (const auto depth : grid.depths) {
            const Forest sub = subset_index(maximal, t, depth);
            for (const auto& strategy : strategies) {
                const bool voting = strategy == "voting";
                if (!voting && strategy != "pq") {
                    throw UsageError("unknown strategy '" + strategy + "'");
                }
                for (const auto knob : voting ? grid.votes : grid.branches) {
                    if (voting && knob > t) continue;  // v > T elects nothing
                    SearchParams params;
                    params.k = args.k;
                    if (voting) {
                        params.strategy = SearchParams::Strategy::Voting;
                        params.vote_threshold = knob;
                    } else {
                        params.strategy = SearchParams::Strategy::PriorityQueue;
                        params.extra_branches = knob;
                    }
                    BenchRow row;
                    row.tree_type = args.tree;
                    row.strategy = strategy;
                    row.trees = t;
                    row.depth = depth;
                    row.knob = knob;
                    row.recall = mean_recall(sub, corpus, queries, truth, params);
                    row.query_seconds = timed_batch_seconds(sub, corpus, queries, params, 3);
                    row.build_seconds = build_s;
                    row.tuning_seconds = 0.0;
                    rows.push_back(row);
                }
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        if (a.recall != b.recall) return a.recall < b.recall;
        return a.query_seconds < b.query_seconds;
    });

    std::ofstream out(args.out, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + args.out + "'");
    if (args.out_format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back({{"tree_type", r.tree_type},
                         {"strategy", r.strategy},
                         {"trees", r.trees},
                         {"depth", r.depth},
                         {"knob", r.knob},
                         {"recall", r.recall},
                         {"query_seconds", r.query_seconds},
                         {"build_seconds", r.build_seconds},
                         {"tuning_seconds", r.tuning_seconds}});
        }
        out << j.dump(2) << '\n';
    } else if (args.out_format == "csv") {
        out << "tree_type,strategy,trees,depth,knob,recall,query_seconds,build_seconds,"
               "tuning_seconds\n";
        for (const auto& r : rows) {
            out << r.tree_type << ',' << r.strategy << ',' << r.trees << ',' << r.depth << ','
                << r.knob << ',' << r.recall << ',' << r.query_seconds << ','
                << r.build_seconds << ',' << r.tuning_seconds << '\n';
        }
    } else {
        throw UsageError("--out-format must be csv or json");
    }
    std::cout << "wrote " << rows.size() << " rows to " << args.out << "\n";
    return 0;
}

struct InspectArgs {
    std::string index, out_format = "text";
};

int cmd_inspect(const InspectArgs& args) {
    const IndexInfo info = read_index_info(args.index);
    if (args.out_format == "json") {
        nlohmann::json j{{"version", info.version},
                         {"n", info.n},
                         {"d", info.d},
                         {"trees", info.num_trees},
                         {"depth", info.depth},
                         {"tree_type", tree_type_name(info.rule.variant)},
                         {"seed", info.seed},
                         {"data_checksum", info.data_checksum},
                         {"default_vote_threshold", info.default_vote_threshold}};
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "index version " << info.version << "\n"
                  << "corpus: n=" << info.n << " d=" << info.d << " checksum=" << std::hex
                  << info.data_checksum << std::dec << "\n"
                  << "forest: " << info.num_trees << " " << tree_type_name(info.rule.variant)
                  << " trees, depth " << info.depth << ", seed " << info.seed << "\n"
                  << "default vote threshold: " << info.default_vote_threshold << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forest-based approximate nearest neighbor search with autotuning"};
    app.require_subcommand(1);
    app.set_config("--config");

    GroundtruthArgs gt;
    auto* gt_cmd = app.add_subcommand("groundtruth", "compute exact k-NN ground truth");
    gt_cmd->add_option("--data", gt.data, "corpus path or synth: spec")->required();
    gt_cmd->add_option("--format", gt.format, "corpus format (fvecs|raw-f32|csv)");
    gt_cmd->add_option("--queries", gt.queries, "query file");
    gt_cmd->add_option("--queries-format", gt.queries_format, "query file format");
    gt_cmd->add_option("--split", gt.split, "hold out MVAL,MTEST rows as queries");
    gt_cmd->add_option("--k", gt.k, "neighbor count");
    gt_cmd->add_option("--seed", gt.seed, "split seed");
    gt_cmd->add_option("--out", gt.out, "output csv")->required();
    gt_cmd->add_option("--out-train", gt.out_train, "write the train part (raw-f32)");
    gt_cmd->add_option("--out-queries", gt.out_queries, "write the held-out queries (raw-f32)");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "grow a forest index without tuning");
    build_cmd->add_option("--data", build.data)->required();
    build_cmd->add_option("--format", build.format);
    build_cmd->add_option("--tree", build.tree, "rkd|rp|pca");
    build_cmd->add_option("--trees", build.trees, "number of trees");
    build_cmd->add_option("--depth", build.depth, "tree depth (0 = auto)");
    build_cmd->add_option("--mtop", build.m_top, "RKD: top-variance pool size");
    build_cmd->add_option("--sparsity", build.sparsity, "RP: non-zero fraction (0 = 1/sqrt d)");
    build_cmd->add_option("--pca-dims", build.pca_dims, "PCA: sampled dims (0 = sqrt d)");
    build_cmd->add_option("--pca-iterations", build.pca_iterations);
    build_cmd->add_flag("--rp-per-node", build.rp_per_node, "per-node RP directions");
    build_cmd->add_option("--seed", build.seed);
    build_cmd->add_option("--out", build.out, "index output path")->required();

    AutotuneArgs tune;
    auto* tune_cmd = app.add_subcommand("autotune", "tune hyperparameters and write an index");
    tune_cmd->add_option("--data", tune.data)->required();
    tune_cmd->add_option("--format", tune.format);
    tune_cmd->add_option("--tree", tune.tree, "rkd|rp|pca");
    tune_cmd->add_option("--target", tune.target, "recall=<e> or time=<t>[s|ms|us]");
    tune_cmd->add_option("--k", tune.k);
    tune_cmd->add_option("--tmax", tune.t_max, "maximal forest size");
    tune_cmd->add_option("--lmin", tune.depth_min, "shallowest tuned depth (0 = auto)");
    tune_cmd->add_option("--lmax", tune.depth_max, "maximal depth (0 = floor(log2 n))");
    tune_cmd->add_option("--mval", tune.m_val, "validation query count");
    tune_cmd->add_option("--seed", tune.seed);
    tune_cmd->add_option("--mtop", tune.m_top);
    tune_cmd->add_option("--sparsity", tune.sparsity);
    tune_cmd->add_option("--pca-dims", tune.pca_dims);
    tune_cmd->add_option("--pca-iterations", tune.pca_iterations);
    tune_cmd->add_flag("--rp-per-node", tune.rp_per_node);
    tune_cmd->add_flag("--include-queries", tune.include_queries,
                       "keep validation queries inside the corpus");
    tune_cmd->add_option("--out", tune.out, "tuned index path");
    tune_cmd->add_option("--report", tune.report, "tuning report JSON path");
    tune_cmd->add_option("--grid-csv", tune.grid_csv, "full lattice grid csv path");
    tune_cmd->add_option("--out-corpus", tune.out_corpus,
                         "write the index corpus (raw-f32) for later query runs");
    tune_cmd->add_option("--out-queries", tune.out_queries,
                         "write the held-out validation queries (raw-f32)");
    tune_cmd->add_option("--model-in", tune.model_in,
                         "reuse a saved time model instead of measuring");
    tune_cmd->add_option("--model-out", tune.model_out, "save the fitted time model (JSON)");

    QueryArgs query;
    auto* query_cmd = app.add_subcommand("query", "answer k-NN queries with an index");
    query_cmd->add_option("--index", query.index)->required();
    query_cmd->add_option("--data", query.data)->required();
    query_cmd->add_option("--format", query.format);
    query_cmd->add_option("--queries", query.queries)->required();
    query_cmd->add_option("--queries-format", query.queries_format);
    query_cmd->add_option("--k", query.k);
    query_cmd->add_option("--truth", query.truth, "ground truth csv for recall reporting");
    query_cmd->add_option("--strategy", query.strategy, "voting|pq");
    query_cmd->add_option("--v", query.v, "vote threshold (0 = index default)");
    query_cmd->add_option("--b", query.b, "extra branches for pq");
    query_cmd->add_option("--repeats", query.repeats, "timed passes (median reported)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "sweep configurations, emit recall/time table");
    bench_cmd->add_option("--data", bench.data)->required();
    bench_cmd->add_option("--format", bench.format);
    bench_cmd->add_option("--tree", bench.tree, "rkd|rp|pca");
    bench_cmd->add_option("--grid", bench.grid, "e.g. T=1,2,4;l=6,8;v=1,2;b=0,16")->required();
    bench_cmd->add_option("--strategies", bench.strategies, "comma list of voting,pq");
    bench_cmd->add_option("--k", bench.k);
    bench_cmd->add_option("--mtest", bench.m_test, "held-out test query count");
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--mtop", bench.m_top);
    bench_cmd->add_option("--sparsity", bench.sparsity);
    bench_cmd->add_option("--pca-dims", bench.pca_dims);
    bench_cmd->add_option("--pca-iterations", bench.pca_iterations);
    bench_cmd->add_option("--out", bench.out, "output table path")->required();
    bench_cmd->add_option("--out-format", bench.out_format, "csv|json");

    InspectArgs inspect;
    auto* inspect_cmd = app.add_subcommand("inspect", "print index header");
    inspect_cmd->add_option("--index", inspect.index)->required();
    inspect_cmd->add_option("--out-format", inspect.out_format, "text|json");

    try {
        app.parse(argc, argv);
        if (gt_cmd->parsed()) return cmd_groundtruth(gt);
        if (build_cmd->parsed()) return cmd_build(build);
        if (tune_cmd->parsed()) return cmd_autotune(tune);
        if (query_cmd->parsed()) return cmd_query(query);
        if (bench_cmd->parsed()) return cmd_bench(bench);
        if (inspect_cmd->parsed()) return cmd_inspect(inspect);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
