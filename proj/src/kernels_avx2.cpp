// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma in its own
// translation unit; only reached after the runtime CPU check in kernels.cpp.

#include "frann/kernels.hpp"

#if FRANN_X86

#include <immintrin.h>

namespace frann::kernels {

namespace {

inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    __m128 sum = _mm_add_ps(lo, hi);
    sum = _mm_hadd_ps(sum, sum);
    sum = _mm_hadd_ps(sum, sum);
    return _mm_cvtss_f32(sum);
}

}  // namespace

float l2_sq_avx2(const float* a, const float* b, std::size_t d) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= d; i += 16) {
        __m256 d0 = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        __m256 d1 = _mm256_sub_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8));
        acc0 = _mm256_fmadd_ps(d0, d0, acc0);
        acc1 = _mm256_fmadd_ps(d1, d1, acc1);
    }
    for (; i + 8 <= d; i += 8) {
        __m256 diff = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        acc0 = _mm256_fmadd_ps(diff, diff, acc0);
    }
    float acc = hsum256(_mm256_add_ps(acc0, acc1));
    for (; i < d; ++i) {
        const float diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

float dot_avx2(const float* a, const float* b, std::size_t d) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= d; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= d; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    float acc = hsum256(_mm256_add_ps(acc0, acc1));
    for (; i < d; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

float sparse_dot_avx2(const float* x, const std::uint32_t* idx, const float* w,
                      std::size_t nnz) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t j = 0;
    for (; j + 8 <= nnz; j += 8) {
        __m256i ind = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx + j));
        __m256 xs = _mm256_i32gather_ps(x, ind, 4);
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(w + j), xs, acc);
    }
    float out = hsum256(acc);
    for (; j < nnz; ++j) {
        out += w[j] * x[idx[j]];
    }
    return out;
}

}  // namespace frann::kernels

#endif  // FRANN_X86
