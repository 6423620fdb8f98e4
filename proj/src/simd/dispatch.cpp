#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cirforge::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#if defined(CIRFORGE_HAVE_AVX2)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CIRFORGE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (const char* forced = std::getenv("CIRFORGE_SIMD"); forced && std::string(forced) == "scalar") {
    return Isa::scalar;
  }
  return cpu_supports(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

namespace {

const KernelTable* table_for(Isa isa) {
  return isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{table_for(detect_isa())};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  if (!cpu_supports(isa) || table_for(isa) == nullptr) {
    throw std::runtime_error("SIMD variant '" + std::string(isa_name(isa)) + "' is not available on this CPU");
  }
  slot().store(table_for(isa), std::memory_order_release);
}

}  // namespace cirforge::simd
