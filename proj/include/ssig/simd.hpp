#pragma once

// Inner-loop kernels with a portable scalar reference and vectorized
// variants chosen once at startup from the host CPU's capabilities.
//
// The vectorized variants reorder floating-point sums, so results agree with
// the scalar reference to rounding, not bitwise. Within one process the
// selected table is fixed, which keeps every run deterministic.
// Set SSIG_ISA=scalar in the environment to force the reference kernels.

#include <cstddef>
#include <string_view>

namespace ssig::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

// Table for a specific instruction set; throws ArgumentError when the host
// (or the build) lacks it.
const KernelTable& kernels_for(Isa isa);

// Active table. Resolved on first use.
const KernelTable& kernels() noexcept;

// Overrides the active table for the rest of the process (tests, benchmarks).
void force_isa(Isa isa);

inline double dot(const double* x, const double* y, std::size_t n) noexcept {
  return kernels().dot(x, y, n);
}

inline void axpy(double a, const double* x, double* y, std::size_t n) noexcept {
  kernels().axpy(a, x, y, n);
}

namespace detail {
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
#if defined(SSIG_HAVE_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
#endif
}  // namespace detail

}  // namespace ssig::simd
