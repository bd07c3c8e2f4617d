// NEON kernel variants (aarch64 baseline, no extra flags needed).

#include "frann/kernels.hpp"

#if FRANN_ARM64

#include <arm_neon.h>

namespace frann::kernels {

float l2_sq_neon(const float* a, const float* b, std::size_t d) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        float32x4_t diff = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
        acc = vfmaq_f32(acc, diff, diff);
    }
    float out = vaddvq_f32(acc);
    for (; i < d; ++i) {
        const float diff = a[i] - b[i];
        out += diff * diff;
    }
    return out;
}

float dot_neon(const float* a, const float* b, std::size_t d) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
        acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float out = vaddvq_f32(acc);
    for (; i < d; ++i) {
        out += a[i] * b[i];
    }
    return out;
}

}  // namespace frann::kernels

#endif  // FRANN_ARM64
