#pragma once
// Vector corpora: file loaders, query splits, the exact k-NN reference and
// ground-truth generation shared by search and evaluation.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace frann {

struct DataMatrix {
    std::uint64_t n = 0;
    std::uint64_t d = 0;
    std::vector<float> values;  // row-major, n*d entries, all finite

    const float* row(std::uint64_t i) const { return values.data() + i * d; }
    std::span<const float> row_span(std::uint64_t i) const { return {row(i), std::size_t(d)}; }
    bool empty() const { return n == 0; }
};

enum class FileFormat { Fvecs, RawF32, Csv };

// Parses "fvecs" | "raw-f32" | "csv"; throws std::invalid_argument otherwise.
FileFormat parse_format(const std::string& name);

// Guesses the format from the file extension (.fvecs, .csv, anything else raw-f32).
FileFormat format_from_extension(const std::filesystem::path& path);

// Loaders reject truncated files, inconsistent record lengths and non-finite
// values with a descriptive std::runtime_error.
DataMatrix load_vectors(const std::filesystem::path& path, FileFormat format);

void save_raw_f32(const std::filesystem::path& path, const DataMatrix& data);
void save_fvecs(const std::filesystem::path& path, const DataMatrix& data);

struct QuerySplit {
    DataMatrix train;
    DataMatrix validation;
    DataMatrix test;
};

// Disjoint row partition, deterministic in the seed. Requires m_val + m_test < n.
QuerySplit split_queries(const DataMatrix& data, std::uint64_t m_val, std::uint64_t m_test,
                         std::uint64_t seed);

float euclidean_distance(std::span<const float> u, std::span<const float> v);

// Indices of the k nearest corpus points, ascending distance, ties broken by
// ascending index. Requires 1 <= k <= n.
std::vector<std::uint32_t> exact_knn(const DataMatrix& data, std::span<const float> q,
                                     std::uint32_t k);

struct GroundTruth {
    std::uint32_t k = 0;
    std::vector<std::vector<std::uint32_t>> rows;  // one row of k indices per query
};

// Exact neighbors for every query row; queries evaluated concurrently.
GroundTruth compute_ground_truth(const DataMatrix& data, const DataMatrix& queries,
                                 std::uint32_t k);

void save_ground_truth_csv(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_ground_truth_csv(const std::filesystem::path& path);

struct QueryEvaluation {
    double recall = 0.0;   // |returned ∩ truth| / k
    double elapsed = 0.0;  // seconds per query
};

// Missing neighbors (short result) count as misses.
double recall_of(std::span<const std::uint32_t> returned, std::span<const std::uint32_t> truth);

// FNV-1a over (n, d, raw value bytes); used to pair an index with its corpus.
std::uint64_t corpus_checksum(const DataMatrix& data);

}  // namespace frann
