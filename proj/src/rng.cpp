#include "frann/rng.hpp"

#include <algorithm>

namespace frann {

std::vector<std::uint32_t> Rng::sample_distinct(std::uint32_t k, std::uint32_t n) {
    std::vector<std::uint32_t> out;
    out.reserve(k);
    // Floyd: for j in [n-k, n), draw t in [0, j]; insert t unless taken, else j.
    for (std::uint32_t j = n - k; j < n; ++j) {
        const auto t = std::uint32_t(uniform(j + 1));
        if (std::find(out.begin(), out.end(), t) == out.end()) {
            out.push_back(t);
        } else {
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace frann
