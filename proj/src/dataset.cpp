#include "frann/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "frann/kernels.hpp"
#include "frann/parallel.hpp"
#include "frann/rng.hpp"

namespace frann {

namespace {

[[noreturn]] void load_fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("failed to load '" + path.string() + "': " + what);
}

void check_finite(const std::filesystem::path& path, const std::vector<float>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            load_fail(path, "non-finite value at flat offset " + std::to_string(i));
        }
    }
}

DataMatrix load_fvecs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) load_fail(path, "cannot open");
    DataMatrix out;
    std::int32_t dim = 0;
    while (in.read(reinterpret_cast<char*>(&dim), 4)) {
        if (dim < 1) load_fail(path, "record dimension " + std::to_string(dim));
        if (out.d == 0) {
            out.d = std::uint64_t(dim);
        } else if (std::uint64_t(dim) != out.d) {
            load_fail(path, "inconsistent record length (" + std::to_string(dim) +
                                " after " + std::to_string(out.d) + ")");
        }
        const std::size_t old = out.values.size();
        out.values.resize(old + std::size_t(dim));
        if (!in.read(reinterpret_cast<char*>(out.values.data() + old), std::streamsize(dim) * 4)) {
            load_fail(path, "truncated record");
        }
        ++out.n;
    }
    if (out.n == 0) load_fail(path, "no records");
    check_finite(path, out.values);
    return out;
}

DataMatrix load_raw_f32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) load_fail(path, "cannot open");
    std::uint64_t header[2] = {0, 0};
    if (!in.read(reinterpret_cast<char*>(header), 16)) load_fail(path, "missing header");
    DataMatrix out;
    out.n = header[0];
    out.d = header[1];
    if (out.n < 1 || out.d < 1) load_fail(path, "empty shape in header");
    out.values.resize(std::size_t(out.n * out.d));
    if (!in.read(reinterpret_cast<char*>(out.values.data()),
                 std::streamsize(out.values.size()) * 4)) {
        load_fail(path, "truncated payload");
    }
    check_finite(path, out.values);
    return out;
}

DataMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) load_fail(path, "cannot open");
    DataMatrix out;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::uint64_t dims = 0;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            float v = 0.0f;
            try {
                v = std::stof(cell, &pos);
            } catch (const std::exception&) {
                load_fail(path, "bad number '" + cell + "' on line " + std::to_string(lineno));
            }
            while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
            if (pos != cell.size()) {
                load_fail(path, "bad number '" + cell + "' on line " + std::to_string(lineno));
            }
            out.values.push_back(v);
            ++dims;
        }
        if (dims == 0) load_fail(path, "empty row on line " + std::to_string(lineno));
        if (out.d == 0) {
            out.d = dims;
        } else if (dims != out.d) {
            load_fail(path, "inconsistent record length on line " + std::to_string(lineno));
        }
        ++out.n;
    }
    if (out.n == 0) load_fail(path, "no records");
    check_finite(path, out.values);
    return out;
}

}  // namespace

FileFormat parse_format(const std::string& name) {
    if (name == "fvecs") return FileFormat::Fvecs;
    if (name == "raw-f32") return FileFormat::RawF32;
    if (name == "csv") return FileFormat::Csv;
    throw std::invalid_argument("unknown format '" + name + "' (expected fvecs|raw-f32|csv)");
}

FileFormat format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".fvecs") return FileFormat::Fvecs;
    if (ext == ".csv") return FileFormat::Csv;
    return FileFormat::RawF32;
}

DataMatrix load_vectors(const std::filesystem::path& path, FileFormat format) {
    switch (format) {
        case FileFormat::Fvecs: return load_fvecs(path);
        case FileFormat::RawF32: return load_raw_f32(path);
        case FileFormat::Csv: return load_csv(path);
    }
    throw std::invalid_argument("unknown format enum");
}

void save_raw_f32(const std::filesystem::path& path, const DataMatrix& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const std::uint64_t header[2] = {data.n, data.d};
    out.write(reinterpret_cast<const char*>(header), 16);
    out.write(reinterpret_cast<const char*>(data.values.data()),
              std::streamsize(data.values.size()) * 4);
    if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

void save_fvecs(const std::filesystem::path& path, const DataMatrix& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const auto dim = std::int32_t(data.d);
    for (std::uint64_t i = 0; i < data.n; ++i) {
        out.write(reinterpret_cast<const char*>(&dim), 4);
        out.write(reinterpret_cast<const char*>(data.row(i)), std::streamsize(data.d) * 4);
    }
    if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

QuerySplit split_queries(const DataMatrix& data, std::uint64_t m_val, std::uint64_t m_test,
                         std::uint64_t seed) {
    if (m_val + m_test >= data.n) {
        throw std::invalid_argument("m_val + m_test must be smaller than the corpus size");
    }
    std::vector<std::uint32_t> order(data.n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(seed, 0x53504c4954ULL));  // stream tag for query splits
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform(i + 1)]);
    }

    const auto take = [&](std::uint64_t lo, std::uint64_t hi) {
        DataMatrix part;
        part.n = hi - lo;
        part.d = data.d;
        part.values.reserve(std::size_t(part.n * part.d));
        std::vector<std::uint32_t> rows(order.begin() + std::ptrdiff_t(lo),
                                        order.begin() + std::ptrdiff_t(hi));
        std::sort(rows.begin(), rows.end());  // keep corpus order within each part
        for (auto r : rows) {
            part.values.insert(part.values.end(), data.row(r), data.row(r) + data.d);
        }
        return part;
    };

    QuerySplit split;
    split.validation = take(0, m_val);
    split.test = take(m_val, m_val + m_test);
    split.train = take(m_val + m_test, data.n);
    return split;
}

float euclidean_distance(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    }
    return std::sqrt(kernels::l2_sq(u.data(), v.data(), u.size()));
}

std::vector<std::uint32_t> exact_knn(const DataMatrix& data, std::span<const float> q,
                                     std::uint32_t k) {
    if (k == 0 || k > data.n) {
        throw std::invalid_argument("exact_knn: k must be in [1, n]");
    }
    if (q.size() != data.d) {
        throw std::invalid_argument("exact_knn: query dimension mismatch");
    }
    std::vector<std::pair<float, std::uint32_t>> dist(data.n);
    for (std::uint64_t i = 0; i < data.n; ++i) {
        dist[i] = {kernels::l2_sq(data.row(i), q.data(), std::size_t(data.d)),
                   std::uint32_t(i)};
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + k);
    std::vector<std::uint32_t> out(k);
    for (std::uint32_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

GroundTruth compute_ground_truth(const DataMatrix& data, const DataMatrix& queries,
                                 std::uint32_t k) {
    GroundTruth truth;
    truth.k = k;
    truth.rows.resize(queries.n);
    parallel_for(std::size_t(queries.n), [&](std::size_t i) {
        truth.rows[i] = exact_knn(data, queries.row_span(i), k);
    });
    return truth;
}

void save_ground_truth_csv(const std::filesystem::path& path, const GroundTruth& truth) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (const auto& row : truth.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

GroundTruth load_ground_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    GroundTruth truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::uint32_t> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::uint32_t(std::stoul(cell)));
        }
        if (truth.rows.empty()) {
            truth.k = std::uint32_t(row.size());
        } else if (row.size() != truth.k) {
            throw std::runtime_error("ragged ground-truth row in '" + path.string() + "'");
        }
        truth.rows.push_back(std::move(row));
    }
    return truth;
}

double recall_of(std::span<const std::uint32_t> returned, std::span<const std::uint32_t> truth) {
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (auto t : truth) {
        if (std::find(returned.begin(), returned.end(), t) != returned.end()) ++hits;
    }
    return double(hits) / double(truth.size());
}

std::uint64_t corpus_checksum(const DataMatrix& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](const unsigned char* bytes, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(reinterpret_cast<const unsigned char*>(&data.n), 8);
    mix(reinterpret_cast<const unsigned char*>(&data.d), 8);
    mix(reinterpret_cast<const unsigned char*>(data.values.data()), data.values.size() * 4);
    return h;
}

}  // namespace frann
