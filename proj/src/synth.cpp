#include "frann/synth.hpp"

#include "frann/rng.hpp"

namespace frann {

DataMatrix make_gaussian_mixture(std::uint64_t n, std::uint64_t d, std::uint32_t clusters,
                                 std::uint64_t seed) {
    DataMatrix data;
    data.n = n;
    data.d = d;
    data.values.resize(std::size_t(n * d));

    Rng rng(derive_seed(seed, 0x4d495854ULL));
    std::vector<double> centers(std::size_t(clusters) * d);
    for (auto& c : centers) c = 200.0 * rng.uniform_real() - 100.0;

    constexpr double kClusterStd = 8.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double* center = centers.data() + (i % clusters) * d;
        float* row = data.values.data() + i * d;
        for (std::uint64_t j = 0; j < d; ++j) {
            row[j] = float(center[j] + kClusterStd * rng.normal());
        }
    }
    return data;
}

DataMatrix make_fixture() { return make_gaussian_mixture(10000, 64, 20, 0xF1D0); }

}  // namespace frann
