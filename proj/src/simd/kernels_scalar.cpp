#include "tables.hpp"

namespace rankshrink::simd::scalar {

namespace {

void shift_scale(const double* mu, const double* noise, double sigma, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mu[i] + sigma * noise[i];
}

void accumulate_gathered_diff(double* acc, const double* a, const double* b, const std::uint32_t* idx,
                              std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) acc[k] += a[idx[k]] - b[idx[k]];
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void add_inplace(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void scale_inplace(double* x, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void polyval(const double* coeffs, std::size_t ncoef, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t m = ncoef; m-- > 0;) r = r * x[i] + coeffs[m];
        out[i] = r;
    }
}

}  // namespace

const KernelTable table{
    Isa::scalar, shift_scale, accumulate_gathered_diff, sum_squared_diff, add_inplace, scale_inplace, polyval,
};

}  // namespace rankshrink::simd::scalar
