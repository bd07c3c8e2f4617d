#include <doctest.h>

#include <cmath>
#include <vector>

#include "frann/kernels.hpp"
#include "frann/rng.hpp"
#include "oracles.hpp"

using namespace frann;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
    std::vector<float> out(n);
    Rng rng(seed);
    for (auto& v : out) v = float(rng.normal());
    return out;
}

}  // namespace

TEST_CASE("dispatched kernels match the scalar reference") {
    INFO("active path: ", kernels::active_path());
    // odd lengths exercise every remainder path of the SIMD variants
    for (std::size_t d : {1, 2, 3, 7, 8, 9, 15, 16, 17, 31, 32, 33, 64, 67, 257}) {
        const auto a = random_floats(d, 11 * d + 1);
        const auto b = random_floats(d, 13 * d + 5);

        const float l2_ref = kernels::l2_sq_scalar(a.data(), b.data(), d);
        const float l2_simd = kernels::l2_sq(a.data(), b.data(), d);
        CHECK(l2_simd == doctest::Approx(l2_ref).epsilon(1e-5));

        const float dot_ref = kernels::dot_scalar(a.data(), b.data(), d);
        const float dot_simd = kernels::dot(a.data(), b.data(), d);
        CHECK(double(dot_simd) ==
              doctest::Approx(double(dot_ref)).epsilon(1e-5).scale(std::abs(l2_ref) + 1.0));
    }
}

TEST_CASE("squared distance agrees with the naive long-double oracle") {
    for (std::size_t d : {4, 16, 100}) {
        const auto a = random_floats(d, 21 * d);
        const auto b = random_floats(d, 23 * d);
        const double expected = oracles::naive_l2_sq(a, b);
        CHECK(double(kernels::l2_sq(a.data(), b.data(), d)) ==
              doctest::Approx(expected).epsilon(1e-5));
        CHECK(double(kernels::l2_sq_scalar(a.data(), b.data(), d)) ==
              doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("sparse gather dot matches scalar and the dense oracle") {
    const std::size_t d = 96;
    const auto x = random_floats(d, 303);
    Rng rng(404);
    for (std::uint32_t nnz : {1u, 3u, 7u, 8u, 9u, 16u, 20u}) {
        Direction dir = random_projection_direction(d, nnz, rng);
        const float ref = kernels::sparse_dot_scalar(x.data(), dir.idx.data(), dir.w.data(), nnz);
        const float simd = kernels::sparse_dot(x.data(), dir.idx.data(), dir.w.data(), nnz);
        CHECK(double(simd) == doctest::Approx(double(ref)).epsilon(1e-5).scale(1.0));
        CHECK(double(ref) ==
              doctest::Approx(oracles::dense_dot(x, dir, d)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("zero-length inputs are safe") {
    CHECK(kernels::l2_sq(nullptr, nullptr, 0) == 0.0f);
    CHECK(kernels::dot(nullptr, nullptr, 0) == 0.0f);
    CHECK(kernels::sparse_dot(nullptr, nullptr, nullptr, 0) == 0.0f);
}
