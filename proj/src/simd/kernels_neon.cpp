// AArch64 variants. NEON has no gather, so accumulate_gathered_diff loads
// lanes individually and vectorizes only the arithmetic.

#include <arm_neon.h>

#include "tables.hpp"

namespace rankshrink::simd::neon {

namespace {

void shift_scale(const double* mu, const double* noise, double sigma, double* out, std::size_t n) {
    const float64x2_t s = vdupq_n_f64(sigma);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t m = vld1q_f64(mu + i);
        float64x2_t e = vld1q_f64(noise + i);
        vst1q_f64(out + i, vaddq_f64(m, vmulq_f64(s, e)));
    }
    for (; i < n; ++i) out[i] = mu[i] + sigma * noise[i];
}

void accumulate_gathered_diff(double* acc, const double* a, const double* b, const std::uint32_t* idx,
                              std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t va = vsetq_lane_f64(a[idx[k + 1]], vdupq_n_f64(a[idx[k]]), 1);
        float64x2_t vb = vsetq_lane_f64(b[idx[k + 1]], vdupq_n_f64(b[idx[k]]), 1);
        vst1q_f64(acc + k, vaddq_f64(vld1q_f64(acc + k), vsubq_f64(va, vb)));
    }
    for (; k < n; ++k) acc[k] += a[idx[k]] - b[idx[k]];
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    float64x2_t s0 = vdupq_n_f64(0.0);
    float64x2_t s1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        s0 = vaddq_f64(s0, vmulq_f64(d0, d0));
        s1 = vaddq_f64(s1, vmulq_f64(d1, d1));
    }
    float64x2_t s01 = vaddq_f64(s0, s1);
    double s = vgetq_lane_f64(s01, 0) + vgetq_lane_f64(s01, 1);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    for (; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* x, double s, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), vs));
    for (; i < n; ++i) x[i] *= s;
}

void polyval(const double* coeffs, std::size_t ncoef, const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vx = vld1q_f64(x + i);
        float64x2_t r = vdupq_n_f64(0.0);
        // vmulq + vaddq rather than vfmaq keeps rounding identical to scalar.
        for (std::size_t m = ncoef; m-- > 0;) r = vaddq_f64(vmulq_f64(r, vx), vdupq_n_f64(coeffs[m]));
        vst1q_f64(out + i, r);
    }
    for (; i < n; ++i) {
        double r = 0.0;
        for (std::size_t m = ncoef; m-- > 0;) r = r * x[i] + coeffs[m];
        out[i] = r;
    }
}

}  // namespace

const KernelTable table{
    Isa::neon, shift_scale, accumulate_gathered_diff, sum_squared_diff, add_inplace, scale_inplace, polyval,
};

}  // namespace rankshrink::simd::neon
