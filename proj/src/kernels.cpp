#include "frann/kernels.hpp"

#include <cstdlib>

namespace frann::kernels {

float l2_sq_scalar(const float* a, const float* b, std::size_t d) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < d; ++i) {
        const float diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

float dot_scalar(const float* a, const float* b, std::size_t d) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < d; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

float sparse_dot_scalar(const float* x, const std::uint32_t* idx, const float* w,
                        std::size_t nnz) {
    float acc = 0.0f;
    for (std::size_t j = 0; j < nnz; ++j) {
        acc += w[j] * x[idx[j]];
    }
    return acc;
}

namespace {

#if FRANN_X86
bool cpu_has_avx2() {
#if defined(FRANN_HAVE_AVX2_TU)
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}
#endif

struct Selection {
    Ops table;
    std::string name;
};

Selection select() {
    const char* force = std::getenv("FRANN_SIMD");
    const std::string want = force ? force : "auto";

    const Ops scalar{&l2_sq_scalar, &dot_scalar, &sparse_dot_scalar};
    if (want == "scalar") return {scalar, "scalar"};

#if FRANN_X86 && defined(FRANN_HAVE_AVX2_TU)
    if ((want == "auto" || want == "avx2") && cpu_has_avx2()) {
        return {{&l2_sq_avx2, &dot_avx2, &sparse_dot_avx2}, "avx2"};
    }
#endif
#if FRANN_ARM64 && defined(FRANN_HAVE_NEON_TU)
    if (want == "auto" || want == "neon") {
        // sparse gather has no NEON counterpart; keep the scalar kernel
        return {{&l2_sq_neon, &dot_neon, &sparse_dot_scalar}, "neon"};
    }
#endif
    return {scalar, "scalar"};
}

const Selection& selection() {
    static const Selection s = select();
    return s;
}

}  // namespace

const Ops& ops() { return selection().table; }

const std::string& active_path() { return selection().name; }

}  // namespace frann::kernels
