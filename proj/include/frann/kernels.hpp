#pragma once
// Scalar reference kernels for the hot arithmetic loops (squared distance,
// dense dot, sparse-gather dot) plus SIMD variants selected at runtime.
// The dispatched and scalar paths are equivalence-tested against each other.

#include <cstddef>
#include <cstdint>
#include <string>

namespace frann::kernels {

// y = sum_i (a[i] - b[i])^2
float l2_sq_scalar(const float* a, const float* b, std::size_t d);

// y = sum_i a[i] * b[i]
float dot_scalar(const float* a, const float* b, std::size_t d);

// y = sum_j w[j] * x[idx[j]], idx strictly increasing, idx[j] < d of x
float sparse_dot_scalar(const float* x, const std::uint32_t* idx, const float* w,
                        std::size_t nnz);

#if defined(__x86_64__) || defined(_M_X64)
#define FRANN_X86 1
#else
#define FRANN_X86 0
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
#define FRANN_ARM64 1
#else
#define FRANN_ARM64 0
#endif

#if FRANN_X86
float l2_sq_avx2(const float* a, const float* b, std::size_t d);
float dot_avx2(const float* a, const float* b, std::size_t d);
float sparse_dot_avx2(const float* x, const std::uint32_t* idx, const float* w,
                      std::size_t nnz);
#endif
#if FRANN_ARM64
float l2_sq_neon(const float* a, const float* b, std::size_t d);
float dot_neon(const float* a, const float* b, std::size_t d);
#endif

struct Ops {
    float (*l2_sq)(const float*, const float*, std::size_t);
    float (*dot)(const float*, const float*, std::size_t);
    float (*sparse_dot)(const float*, const std::uint32_t*, const float*, std::size_t);
};

// Active kernel table. Picked once per process: scalar unless the CPU supports
// a compiled SIMD path. FRANN_SIMD=scalar|avx2|neon|auto forces a choice
// (requesting an unavailable path falls back to scalar).
const Ops& ops();

// Name of the selected path ("scalar", "avx2", "neon").
const std::string& active_path();

inline float l2_sq(const float* a, const float* b, std::size_t d) {
    return ops().l2_sq(a, b, d);
}
inline float dot(const float* a, const float* b, std::size_t d) {
    return ops().dot(a, b, d);
}
inline float sparse_dot(const float* x, const std::uint32_t* idx, const float* w,
                        std::size_t nnz) {
    return ops().sparse_dot(x, idx, w, nnz);
}

}  // namespace frann::kernels
