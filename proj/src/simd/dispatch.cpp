#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tables.hpp"

namespace rankshrink::simd {

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_available(isa)) throw std::logic_error("simd: ISA not available: " + std::string(to_string(isa)));
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::table;
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::table;
#endif
        default: return scalar::table;
    }
}

namespace {

Isa select_isa() {
    if (const char* env = std::getenv("RANKSHRINK_SIMD")) {
        std::string want(env);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == to_string(isa) && isa_available(isa)) return isa;
        }
    }
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable& active = kernels_for(select_isa());
    return active;
}

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

}  // namespace rankshrink::simd
