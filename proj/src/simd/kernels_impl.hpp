#pragma once

#include "cirforge/simd/kernels.hpp"

namespace cirforge::simd::detail {

extern const KernelTable kScalarTable;

#if defined(CIRFORGE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace cirforge::simd::detail
