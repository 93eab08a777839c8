#pragma once

#include "rankshrink/simd/kernels.hpp"

namespace rankshrink::simd {

namespace scalar {
extern const KernelTable table;
}

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable table;
}
#endif

#if defined(__aarch64__)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace rankshrink::simd
