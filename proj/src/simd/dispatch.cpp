#include <atomic>
#include <cstdlib>
#include <string>

#include "ssig/error.hpp"
#include "ssig/simd.hpp"

namespace ssig::simd {
namespace {

constexpr KernelTable kScalar{Isa::scalar, &detail::dot_scalar, &detail::axpy_scalar};
#if defined(SSIG_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &detail::dot_avx2, &detail::axpy_avx2};
#endif

bool host_has_avx2() noexcept {
#if defined(SSIG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_default() noexcept {
  if (const char* env = std::getenv("SSIG_ISA")) {
    if (std::string(env) == "scalar") return &kScalar;
  }
#if defined(SSIG_HAVE_AVX2)
  if (host_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return host_has_avx2();
  }
  return false;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ArgumentError("instruction set not available: " + std::string(isa_name(isa)));
  }
#if defined(SSIG_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_relaxed); }

}  // namespace ssig::simd
