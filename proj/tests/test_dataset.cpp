#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "frann/dataset.hpp"
#include "oracles.hpp"

using namespace frann;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("frann_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path file(const std::string& name) const { return path / name; }
    static int& counter() {
        static int c = 0;
        return c;
    }
};


}  // namespace

TEST_CASE("fvecs loader decodes records") {
    TempDir dir;
    // two records of d=3
    const std::int32_t d = 3;
    const float r0[3] = {1.0f, 2.0f, 3.0f};
    const float r1[3] = {4.0f, 5.0f, 6.0f};
    std::ofstream out(dir.file("a.fvecs"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(r0), 12);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(r1), 12);
    out.close();

    const DataMatrix m = load_vectors(dir.file("a.fvecs"), FileFormat::Fvecs);
    CHECK(m.n == 2);
    CHECK(m.d == 3);
    CHECK(m.row(1)[2] == 6.0f);
}

TEST_CASE("fvecs loader rejects inconsistent record lengths") {
    TempDir dir;
    const std::int32_t d3 = 3, d2 = 2;
    const float vals[3] = {1, 2, 3};
    std::ofstream out(dir.file("bad.fvecs"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(&d3), 4);
    out.write(reinterpret_cast<const char*>(vals), 12);
    out.write(reinterpret_cast<const char*>(&d2), 4);
    out.write(reinterpret_cast<const char*>(vals), 8);
    out.close();
    CHECK_THROWS_AS(load_vectors(dir.file("bad.fvecs"), FileFormat::Fvecs), std::runtime_error);
}

TEST_CASE("raw-f32 loader reads 12 floats as 3x4") {
    TempDir dir;
    const std::uint64_t header[2] = {3, 4};
    float payload[12];
    for (int i = 0; i < 12; ++i) payload[i] = float(i);
    std::ofstream out(dir.file("a.raw"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(header), 16);
    out.write(reinterpret_cast<const char*>(payload), 48);
    out.close();

    const DataMatrix m = load_vectors(dir.file("a.raw"), FileFormat::RawF32);
    CHECK(m.n == 3);
    CHECK(m.d == 4);
    CHECK(m.row(2)[3] == 11.0f);
}

TEST_CASE("csv loader rejects non-finite values") {
    TempDir dir;
    std::ofstream(dir.file("bad.csv")) << "1.0,2.0\n3.0,inf\n";
    CHECK_THROWS_WITH_AS(load_vectors(dir.file("bad.csv"), FileFormat::Csv),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("csv loader parses plain rows") {
    TempDir dir;
    std::ofstream(dir.file("ok.csv")) << "1.5,-2.25,3\n0,0.5,7\n";
    const DataMatrix m = load_vectors(dir.file("ok.csv"), FileFormat::Csv);
    CHECK(m.n == 2);
    CHECK(m.d == 3);
    CHECK(m.row(0)[1] == -2.25f);
}

TEST_CASE("raw-f32 round-trips bit-exactly") {
    TempDir dir;
    const DataMatrix data = oracles::random_matrix(37, 9, 99);
    save_raw_f32(dir.file("rt.raw"), data);
    const DataMatrix back = load_vectors(dir.file("rt.raw"), FileFormat::RawF32);
    CHECK(back.n == data.n);
    CHECK(back.d == data.d);
    CHECK(back.values == data.values);
}

TEST_CASE("split_queries partitions deterministically") {
    const DataMatrix data = oracles::random_matrix(100, 4, 7);
    const QuerySplit a = split_queries(data, 10, 10, 7);
    CHECK(a.train.n == 80);
    CHECK(a.validation.n == 10);
    CHECK(a.test.n == 10);

    const QuerySplit b = split_queries(data, 10, 10, 7);
    CHECK(a.train.values == b.train.values);
    CHECK(a.validation.values == b.validation.values);
    CHECK(a.test.values == b.test.values);

    // disjoint partition: every original row appears exactly once
    std::size_t total_rows = a.train.n + a.validation.n + a.test.n;
    CHECK(total_rows == data.n);

    CHECK_THROWS_AS(split_queries(data, 60, 60, 7), std::invalid_argument);
}

TEST_CASE("euclidean_distance basics") {
    const std::vector<float> zero{0, 0}, p{3, 4};
    CHECK(euclidean_distance(p, p) == 0.0f);
    CHECK(euclidean_distance(zero, p) == doctest::Approx(5.0));
    CHECK_THROWS_AS(euclidean_distance(zero, std::vector<float>{1, 2, 3}),
                    std::invalid_argument);

    const auto u = oracles::random_matrix(1, 16, 31);
    const auto v = oracles::random_matrix(1, 16, 32);
    const double expected = std::sqrt(oracles::naive_l2_sq(u.row_span(0), v.row_span(0)));
    CHECK(double(euclidean_distance(u.row_span(0), v.row_span(0))) ==
          doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("exact_knn basics and oracle agreement") {
    DataMatrix line;
    line.n = 3;
    line.d = 1;
    line.values = {0.0f, 1.0f, 2.0f};
    const std::vector<float> q{0.9f};
    CHECK(exact_knn(line, q, 2) == std::vector<std::uint32_t>{1, 0});
    CHECK_THROWS_AS(exact_knn(line, q, 0), std::invalid_argument);
    CHECK_THROWS_AS(exact_knn(line, q, 4), std::invalid_argument);

    const DataMatrix data = oracles::random_matrix(200, 8, 77);
    // a corpus point is its own nearest neighbor
    CHECK(exact_knn(data, data.row_span(42), 1) == std::vector<std::uint32_t>{42});
    for (std::uint64_t qi : {0ull, 5ull, 120ull}) {
        CHECK(exact_knn(data, data.row_span(qi), 10) ==
              oracles::full_sort_knn(data, data.row_span(qi), 10));
    }
}

TEST_CASE("exact_knn(k) is a prefix of exact_knn(k+1)") {
    const DataMatrix data = oracles::random_matrix(60, 6, 123);
    const DataMatrix queries = oracles::random_matrix(8, 6, 124);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        for (std::uint32_t k = 1; k < 12; ++k) {
            const auto small = exact_knn(data, queries.row_span(qi), k);
            const auto large = exact_knn(data, queries.row_span(qi), k + 1);
            CHECK(std::equal(small.begin(), small.end(), large.begin()));
        }
    }
}

TEST_CASE("ground truth recall against the full-sort oracle is exactly 1") {
    const DataMatrix data = oracles::random_matrix(150, 5, 55);
    const DataMatrix queries = oracles::random_matrix(12, 5, 56);
    const GroundTruth truth = compute_ground_truth(data, queries, 7);
    for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
        const auto expected = oracles::full_sort_knn(data, queries.row_span(qi), 7);
        CHECK(recall_of(truth.rows[qi], expected) == 1.0);
    }
}

TEST_CASE("ground truth csv round-trips") {
    TempDir dir;
    const DataMatrix data = oracles::random_matrix(40, 3, 9);
    const DataMatrix queries = oracles::random_matrix(5, 3, 10);
    const GroundTruth truth = compute_ground_truth(data, queries, 4);
    save_ground_truth_csv(dir.file("gt.csv"), truth);
    const GroundTruth back = load_ground_truth_csv(dir.file("gt.csv"));
    CHECK(back.k == truth.k);
    CHECK(back.rows == truth.rows);
}

TEST_CASE("recall_of counts short results as misses") {
    const std::vector<std::uint32_t> truth{1, 2, 3, 4};
    const std::vector<std::uint32_t> partial{2, 9};
    CHECK(recall_of(partial, truth) == doctest::Approx(0.25));
    CHECK(recall_of({}, truth) == 0.0);
}
