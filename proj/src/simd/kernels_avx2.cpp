// Compiled with -mavx2 (and deliberately without -mfma) so that multiply
// and add round separately, exactly like the scalar reference.

#include <immintrin.h>

#include "tables.hpp"

namespace rankshrink::simd::avx2 {

namespace {

void shift_scale(const double* mu, const double* noise, double sigma, double* out, std::size_t n) {
    const __m256d s = _mm256_set1_pd(sigma);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d m = _mm256_loadu_pd(mu + i);
        __m256d e = _mm256_loadu_pd(noise + i);
        _mm256_storeu_pd(out + i, _mm256_add_pd(m, _mm256_mul_pd(s, e)));
    }
    for (; i < n; ++i) out[i] = mu[i] + sigma * noise[i];
}

void accumulate_gathered_diff(double* acc, const double* a, const double* b, const std::uint32_t* idx,
                              std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m128i ix = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
        __m256d va = _mm256_i32gather_pd(a, ix, 8);
        __m256d vb = _mm256_i32gather_pd(b, ix, 8);
        __m256d c = _mm256_loadu_pd(acc + k);
        _mm256_storeu_pd(acc + k, _mm256_add_pd(c, _mm256_sub_pd(va, vb)));
    }
    for (; k < n; ++k) acc[k] += a[idx[k]] - b[idx[k]];
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        s0 = _mm256_add_pd(s0, _mm256_mul_pd(d0, d0));
        s1 = _mm256_add_pd(s1, _mm256_mul_pd(d1, d1));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(s0, s1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* x, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
    for (; i < n; ++i) x[i] *= s;
}

void polyval(const double* coeffs, std::size_t ncoef, const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d r = _mm256_setzero_pd();
        for (std::size_t m = ncoef; m-- > 0;) {
            r = _mm256_add_pd(_mm256_mul_pd(r, vx), _mm256_set1_pd(coeffs[m]));
        }
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        double r = 0.0;
        for (std::size_t m = ncoef; m-- > 0;) r = r * x[i] + coeffs[m];
        out[i] = r;
    }
}

}  // namespace

const KernelTable table{
    Isa::avx2, shift_scale, accumulate_gathered_diff, sum_squared_diff, add_inplace, scale_inplace, polyval,
};

}  // namespace rankshrink::simd::avx2
