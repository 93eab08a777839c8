#pragma once

// Data-parallel inner loops shared by the estimators.
//
// Every kernel has a scalar reference implementation plus optional AVX2
// and NEON variants. The variant is picked once per process from the CPU
// features (override with RANKSHRINK_SIMD=scalar|avx2|neon). Elementwise
// kernels are bit-identical across variants; the reduction kernel
// (sum_squared_diff) agrees to rounding only, because lanes are summed in
// a different order.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace rankshrink::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;

    /// out[i] = mu[i] + sigma * noise[i]
    void (*shift_scale)(const double* mu, const double* noise, double sigma, double* out, std::size_t n);

    /// acc[k] += a[idx[k]] - b[idx[k]]
    void (*accumulate_gathered_diff)(double* acc, const double* a, const double* b,
                                     const std::uint32_t* idx, std::size_t n);

    /// sum_i (a[i] - b[i])^2
    double (*sum_squared_diff)(const double* a, const double* b, std::size_t n);

    /// acc[i] += x[i]
    void (*add_inplace)(double* acc, const double* x, std::size_t n);

    /// x[i] *= s
    void (*scale_inplace)(double* x, double s, std::size_t n);

    /// out[i] = sum_m coeffs[m] * x[i]^m, Horner order, no fused multiply-add.
    void (*polyval)(const double* coeffs, std::size_t ncoef, const double* x, double* out, std::size_t n);
};

bool isa_available(Isa isa) noexcept;

/// Table for a specific ISA. Must only be called when isa_available(isa).
const KernelTable& kernels_for(Isa isa);

/// Table selected for this process.
const KernelTable& kernels();

std::string_view to_string(Isa isa) noexcept;

}  // namespace rankshrink::simd
