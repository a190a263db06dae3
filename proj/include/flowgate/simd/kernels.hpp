#pragma once

// Data-parallel inner loops shared by the warp, loss and metric code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is picked once at startup from CPUID, and the
// FLOWGATE_ISA environment variable (scalar|avx2) can force a choice.
//
// Element-wise kernels (warps, blend, filters) are bit-identical across
// variants: both evaluate the same expression tree without FMA contraction.
// Reductions (sums) differ only in summation order.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace flowgate {

enum class BorderMode : std::uint8_t {
    Clamp, // replicate edge samples
    Zero,  // out-of-range samples read as 0
};

} // namespace flowgate

namespace flowgate::simd {

enum class Isa : std::uint8_t { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

// dst(y,x,c) = bilinear sample of src at (y + v(y,x), x + u(y,x)).
// flow is interleaved (u,v), h*w*2 doubles; src/dst are h*w*c interleaved.
using WarpFn = void (*)(const double* src, int h, int w, int c, const double* flow, BorderMode border,
                        double* dst);

// Single-channel clamped warp that also returns the partial derivatives of the
// bilinear interpolant w.r.t. the sample coordinates.
using WarpGradFn = void (*)(const double* src, int h, int w, const double* flow, double* val, double* dval_dx,
                            double* dval_dy);

// out = a*m + b*(1-m), mask broadcast over c interleaved channels.
using BlendFn = void (*)(const double* a, const double* b, const std::uint8_t* mask, std::size_t pixels, int c,
                         double* out);

using SumSqDiffFn = double (*)(const double* a, const double* b, std::size_t n);

// sum |a*m - b*m| over all h*w*c entries, mask broadcast over channels.
using MaskedAbsDiffFn = double (*)(const double* a, const double* b, const std::uint8_t* mask,
                                   std::size_t pixels, int c);

// sum of sqrt(r^2 + eps^2) - eps; writes r / sqrt(r^2 + eps^2) into deriv when non-null.
using CharbonnierFn = double (*)(const double* r, std::size_t n, double eps, double* deriv);

// Valid-mode 1-D correlation. Rows: out is h x (w - taps + 1). Cols: out is (h - taps + 1) x w.
using FilterFn = void (*)(const double* in, int h, int w, const double* taps, int ntaps, double* out);

struct KernelTable {
    Isa isa;
    WarpFn warp_bilinear;
    WarpGradFn warp_bilinear_grad;
    BlendFn blend;
    SumSqDiffFn sum_sq_diff;
    MaskedAbsDiffFn masked_abs_diff;
    CharbonnierFn charbonnier;
    FilterFn filter_rows;
    FilterFn filter_cols;
};

/// Table currently used by the library.
const KernelTable& active();

/// nullptr when the ISA is not compiled in or not supported by this CPU.
const KernelTable* table_for(Isa isa);

bool supported(Isa isa);
Isa best_supported();

/// Switches the active table; throws InvalidArgument if unsupported.
void select(Isa isa);

/// RAII override of the active table, used by equivalence tests.
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa);
    ~ScopedIsa();
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

namespace scalar {
extern const KernelTable table;
}

#if defined(__x86_64__) || defined(_M_X64)
#define FLOWGATE_HAVE_AVX2_KERNELS 1
namespace avx2 {
extern const KernelTable table;
}
#endif

} // namespace flowgate::simd
