#pragma once
// Synthetic corpora for tests and benchmarks.

#include <cstdint>

#include "frann/dataset.hpp"

namespace frann {

// Mixture of spherical Gaussians: centers uniform in [-100, 100]^d, per-cluster
// standard deviation 8, cluster assignment round-robin. Deterministic in seed.
DataMatrix make_gaussian_mixture(std::uint64_t n, std::uint64_t d, std::uint32_t clusters,
                                 std::uint64_t seed);

// The bundled benchmark fixture: n=10000, d=64, 20 clusters, fixed seed.
DataMatrix make_fixture();

}  // namespace frann
