#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "frann/forest_io.hpp"
#include "frann/search.hpp"
#include "oracles.hpp"

using namespace frann;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("frann_io_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("forest save/load round-trips and re-saves byte-identically") {
    const DataMatrix data = oracles::random_matrix(350, 12, 601);
    for (auto variant : {TreeType::RKD, TreeType::RP, TreeType::RandomizedPCA}) {
        SplitRule rule;
        rule.variant = variant;
        Forest forest = grow_forest(data, 4, 5, rule, 91);
        forest.default_vote_threshold = 2;

        const auto path = temp_file("rt_" + std::string(tree_type_name(variant)) + ".idx");
        save_forest(path, forest);
        const Forest loaded = load_forest(path);
        CHECK(loaded.n == forest.n);
        CHECK(loaded.depth == 5);
        CHECK(loaded.default_vote_threshold == 2);
        CHECK(loaded.data_checksum == corpus_checksum(data));

        SearchParams params;
        params.k = 7;
        params.vote_threshold = 2;
        const DataMatrix queries = oracles::random_matrix(15, 12, 602);
        for (std::uint64_t qi = 0; qi < queries.n; ++qi) {
            CHECK(query_voting(loaded, data, queries.row_span(qi), params) ==
                  query_voting(forest, data, queries.row_span(qi), params));
        }

        const auto path2 = temp_file("rt2_" + std::string(tree_type_name(variant)) + ".idx");
        save_forest(path2, loaded);
        CHECK(slurp(path) == slurp(path2));
        fs::remove(path);
        fs::remove(path2);
    }
}

TEST_CASE("same seed produces a byte-identical index file") {
    const DataMatrix data = oracles::random_matrix(200, 8, 611);
    SplitRule rule;
    rule.variant = TreeType::RP;
    const auto p1 = temp_file("det1.idx");
    const auto p2 = temp_file("det2.idx");
    save_forest(p1, grow_forest(data, 5, 4, rule, 1234));
    save_forest(p2, grow_forest(data, 5, 4, rule, 1234));
    CHECK(slurp(p1) == slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("index info reads the header without the trees") {
    const DataMatrix data = oracles::random_matrix(100, 6, 621);
    SplitRule rule;
    rule.variant = TreeType::RandomizedPCA;
    rule.pca_iterations = 11;
    const auto path = temp_file("info.idx");
    save_forest(path, grow_forest(data, 3, 4, rule, 55));
    const IndexInfo info = read_index_info(path);
    CHECK(info.n == 100);
    CHECK(info.d == 6);
    CHECK(info.num_trees == 3);
    CHECK(info.depth == 4);
    CHECK(info.rule.variant == TreeType::RandomizedPCA);
    CHECK(info.rule.pca_iterations == 11);
    CHECK(info.seed == 55);
    fs::remove(path);
}

TEST_CASE("loader rejects foreign files") {
    const auto path = temp_file("garbage.idx");
    std::ofstream(path, std::ios::binary) << "this is not an index";
    CHECK_THROWS_AS(load_forest(path), std::runtime_error);
    CHECK_THROWS_AS(read_index_info(path), std::runtime_error);
    fs::remove(path);
    CHECK_THROWS_AS(load_forest(temp_file("missing.idx")), std::runtime_error);
}
