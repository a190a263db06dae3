#include "flowgate/simd/kernels.hpp"

#if defined(FLOWGATE_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include "sample_common.hpp"

// Only avx2 is enabled, not fma: the scalar reference uses separate multiply
// and add, and the build disables contraction, so lanes match it bit for bit.
#define FG_AVX2 __attribute__((target("avx2")))

namespace flowgate::simd::avx2 {

namespace {

struct CellV {
    __m128i i0;
    __m128i i1;
    __m256d frac;
    __m128i in0; // all ones where the unclamped index is in range
    __m128i in1;
};

FG_AVX2 inline CellV make_cell_v(__m256d s, int n)
{
    s = _mm256_min_pd(_mm256_max_pd(s, _mm256_set1_pd(-2.0)), _mm256_set1_pd(static_cast<double>(n + 1)));
    const __m256d f = _mm256_floor_pd(s);
    const __m128i k0 = _mm256_cvttpd_epi32(f);
    const __m128i k1 = _mm_add_epi32(k0, _mm_set1_epi32(1));
    const __m128i minus1 = _mm_set1_epi32(-1);
    const __m128i nv = _mm_set1_epi32(n);
    const __m128i zero = _mm_setzero_si128();
    const __m128i hi = _mm_set1_epi32(n - 1);
    CellV c;
    c.frac = _mm256_sub_pd(s, f);
    c.in0 = _mm_and_si128(_mm_cmpgt_epi32(k0, minus1), _mm_cmpgt_epi32(nv, k0));
    c.in1 = _mm_and_si128(_mm_cmpgt_epi32(k1, minus1), _mm_cmpgt_epi32(nv, k1));
    c.i0 = _mm_min_epi32(_mm_max_epi32(k0, zero), hi);
    c.i1 = _mm_min_epi32(_mm_max_epi32(k1, zero), hi);
    return c;
}

// (u0 v0 u1 v1)(u2 v2 u3 v3) -> (u0 u1 u2 u3), (v0 v1 v2 v3)
FG_AVX2 inline void load_flow4(const double* flow, __m256d& u, __m256d& v)
{
    const __m256d a = _mm256_loadu_pd(flow);
    const __m256d b = _mm256_loadu_pd(flow + 4);
    u = _mm256_permute4x64_pd(_mm256_unpacklo_pd(a, b), 0xD8);
    v = _mm256_permute4x64_pd(_mm256_unpackhi_pd(a, b), 0xD8);
}

FG_AVX2 inline __m256d lane_mask(__m128i m32)
{
    return _mm256_castsi256_pd(_mm256_cvtepi32_epi64(m32));
}

FG_AVX2 inline double hsum(__m256d v)
{
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return (t[0] + t[1]) + (t[2] + t[3]);
}

FG_AVX2 inline __m256d load_mask4(const std::uint8_t* m)
{
    int raw;
    __builtin_memcpy(&raw, m, sizeof raw);
    __m128i b = _mm_cvtepu8_epi32(_mm_cvtsi32_si128(raw));
    b = _mm_min_epu32(b, _mm_set1_epi32(1));
    return _mm256_cvtepi32_pd(b);
}

FG_AVX2 void warp_bilinear(const double* src, int h, int w, int c, const double* flow, BorderMode border,
                           double* dst)
{
    const __m256d one = _mm256_set1_pd(1.0);
    const __m128i wv = _mm_set1_epi32(w);
    const __m128i cv = _mm_set1_epi32(c);
    const bool zero = border == BorderMode::Zero;
    for (int y = 0; y < h; ++y) {
        const __m256d ys = _mm256_set1_pd(static_cast<double>(y));
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            __m256d u, v;
            load_flow4(flow + 2 * p, u, v);
            const __m256d xs = _mm256_set_pd(x + 3.0, x + 2.0, x + 1.0, static_cast<double>(x));
            const CellV cx = make_cell_v(_mm256_add_pd(xs, u), w);
            const CellV cy = make_cell_v(_mm256_add_pd(ys, v), h);
            const __m256d bx = _mm256_sub_pd(one, cx.frac);
            const __m256d by = _mm256_sub_pd(one, cy.frac);
            const __m128i r0 = _mm_mullo_epi32(cy.i0, wv);
            const __m128i r1 = _mm_mullo_epi32(cy.i1, wv);
            const __m128i p00 = _mm_mullo_epi32(_mm_add_epi32(r0, cx.i0), cv);
            const __m128i p01 = _mm_mullo_epi32(_mm_add_epi32(r0, cx.i1), cv);
            const __m128i p10 = _mm_mullo_epi32(_mm_add_epi32(r1, cx.i0), cv);
            const __m128i p11 = _mm_mullo_epi32(_mm_add_epi32(r1, cx.i1), cv);
            __m256d ok00 = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
            __m256d ok01 = ok00, ok10 = ok00, ok11 = ok00;
            if (zero) {
                ok00 = lane_mask(_mm_and_si128(cy.in0, cx.in0));
                ok01 = lane_mask(_mm_and_si128(cy.in0, cx.in1));
                ok10 = lane_mask(_mm_and_si128(cy.in1, cx.in0));
                ok11 = lane_mask(_mm_and_si128(cy.in1, cx.in1));
            }
            for (int ch = 0; ch < c; ++ch) {
                const __m128i chv = _mm_set1_epi32(ch);
                const __m256d v00 = _mm256_and_pd(_mm256_i32gather_pd(src, _mm_add_epi32(p00, chv), 8), ok00);
                const __m256d v01 = _mm256_and_pd(_mm256_i32gather_pd(src, _mm_add_epi32(p01, chv), 8), ok01);
                const __m256d v10 = _mm256_and_pd(_mm256_i32gather_pd(src, _mm_add_epi32(p10, chv), 8), ok10);
                const __m256d v11 = _mm256_and_pd(_mm256_i32gather_pd(src, _mm_add_epi32(p11, chv), 8), ok11);
                const __m256d top = _mm256_add_pd(_mm256_mul_pd(v00, bx), _mm256_mul_pd(v01, cx.frac));
                const __m256d bot = _mm256_add_pd(_mm256_mul_pd(v10, bx), _mm256_mul_pd(v11, cx.frac));
                const __m256d res = _mm256_add_pd(_mm256_mul_pd(top, by), _mm256_mul_pd(bot, cy.frac));
                if (c == 1) {
                    _mm256_storeu_pd(dst + p, res);
                } else {
                    alignas(32) double t[4];
                    _mm256_store_pd(t, res);
                    for (int i = 0; i < 4; ++i)
                        dst[(p + i) * c + ch] = t[i];
                }
            }
        }
        for (; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            warp_pixel(src, h, w, c, x, y, flow[2 * p], flow[2 * p + 1], border, dst + p * c);
        }
    }
}

FG_AVX2 void warp_bilinear_grad(const double* src, int h, int w, const double* flow, double* val,
                                double* dval_dx, double* dval_dy)
{
    const __m256d one = _mm256_set1_pd(1.0);
    const __m128i wv = _mm_set1_epi32(w);
    for (int y = 0; y < h; ++y) {
        const __m256d ys = _mm256_set1_pd(static_cast<double>(y));
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            __m256d u, v;
            load_flow4(flow + 2 * p, u, v);
            const __m256d xs = _mm256_set_pd(x + 3.0, x + 2.0, x + 1.0, static_cast<double>(x));
            const CellV cx = make_cell_v(_mm256_add_pd(xs, u), w);
            const CellV cy = make_cell_v(_mm256_add_pd(ys, v), h);
            const __m256d ax = cx.frac, ay = cy.frac;
            const __m256d bx = _mm256_sub_pd(one, ax);
            const __m256d by = _mm256_sub_pd(one, ay);
            const __m128i r0 = _mm_mullo_epi32(cy.i0, wv);
            const __m128i r1 = _mm_mullo_epi32(cy.i1, wv);
            const __m256d v00 = _mm256_i32gather_pd(src, _mm_add_epi32(r0, cx.i0), 8);
            const __m256d v01 = _mm256_i32gather_pd(src, _mm_add_epi32(r0, cx.i1), 8);
            const __m256d v10 = _mm256_i32gather_pd(src, _mm_add_epi32(r1, cx.i0), 8);
            const __m256d v11 = _mm256_i32gather_pd(src, _mm_add_epi32(r1, cx.i1), 8);
            const __m256d top = _mm256_add_pd(_mm256_mul_pd(v00, bx), _mm256_mul_pd(v01, ax));
            const __m256d bot = _mm256_add_pd(_mm256_mul_pd(v10, bx), _mm256_mul_pd(v11, ax));
            _mm256_storeu_pd(val + p, _mm256_add_pd(_mm256_mul_pd(top, by), _mm256_mul_pd(bot, ay)));
            _mm256_storeu_pd(dval_dx + p, _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(v01, v00), by),
                                                        _mm256_mul_pd(_mm256_sub_pd(v11, v10), ay)));
            _mm256_storeu_pd(dval_dy + p, _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(v10, v00), bx),
                                                        _mm256_mul_pd(_mm256_sub_pd(v11, v01), ax)));
        }
        for (; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            warp_grad_pixel(src, h, w, x, y, flow[2 * p], flow[2 * p + 1], val + p, dval_dx + p, dval_dy + p);
        }
    }
}

FG_AVX2 void blend(const double* a, const double* b, const std::uint8_t* mask, std::size_t pixels, int c,
                   double* out)
{
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t p = 0;
    if (c == 1 || c == 3) {
        for (; p + 4 <= pixels; p += 4) {
            const __m256d m = load_mask4(mask + p);
            __m256d ms[3];
            int nv = 1;
            if (c == 1) {
                ms[0] = m;
            } else {
                ms[0] = _mm256_permute4x64_pd(m, 0x40);
                ms[1] = _mm256_permute4x64_pd(m, 0xA5);
                ms[2] = _mm256_permute4x64_pd(m, 0xFE);
                nv = 3;
            }
            for (int k = 0; k < nv; ++k) {
                const std::size_t i = p * c + 4 * k;
                const __m256d n = _mm256_sub_pd(one, ms[k]);
                const __m256d r = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + i), ms[k]),
                                                _mm256_mul_pd(_mm256_loadu_pd(b + i), n));
                _mm256_storeu_pd(out + i, r);
            }
        }
    }
    for (; p < pixels; ++p) {
        const double m = mask[p] ? 1.0 : 0.0;
        const double n = 1.0 - m;
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t i = p * c + ch;
            out[i] = a[i] * m + b[i] * n;
        }
    }
}

FG_AVX2 double sum_sq_diff(const double* a, const double* b, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

FG_AVX2 double masked_abs_diff(const double* a, const double* b, const std::uint8_t* mask, std::size_t pixels,
                               int c)
{
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t p = 0;
    if (c == 1 || c == 3) {
        for (; p + 4 <= pixels; p += 4) {
            const __m256d m = load_mask4(mask + p);
            __m256d ms[3];
            int nv = 1;
            if (c == 1) {
                ms[0] = m;
            } else {
                ms[0] = _mm256_permute4x64_pd(m, 0x40);
                ms[1] = _mm256_permute4x64_pd(m, 0xA5);
                ms[2] = _mm256_permute4x64_pd(m, 0xFE);
                nv = 3;
            }
            for (int k = 0; k < nv; ++k) {
                const std::size_t i = p * c + 4 * k;
                const __m256d d = _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(a + i), ms[k]),
                                                _mm256_mul_pd(_mm256_loadu_pd(b + i), ms[k]));
                acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
            }
        }
    }
    double s = hsum(acc);
    for (; p < pixels; ++p) {
        const double m = mask[p] ? 1.0 : 0.0;
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t i = p * c + ch;
            const double d = a[i] * m - b[i] * m;
            s += __builtin_fabs(d);
        }
    }
    return s;
}

FG_AVX2 double charbonnier(const double* r, std::size_t n, double eps, double* deriv)
{
    const __m256d e2 = _mm256_set1_pd(eps * eps);
    const __m256d ev = _mm256_set1_pd(eps);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(r + i);
        const __m256d q = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(x, x), e2));
        acc = _mm256_add_pd(acc, _mm256_sub_pd(q, ev));
        if (deriv)
            _mm256_storeu_pd(deriv + i, _mm256_div_pd(x, q));
    }
    double s = hsum(acc);
    const double e2s = eps * eps;
    for (; i < n; ++i) {
        const double q = __builtin_sqrt(r[i] * r[i] + e2s);
        s += q - eps;
        if (deriv)
            deriv[i] = r[i] / q;
    }
    return s;
}

FG_AVX2 void filter_rows(const double* in, int h, int w, const double* taps, int ntaps, double* out)
{
    const int ow = w - ntaps + 1;
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * ow;
        int x = 0;
        for (; x + 4 <= ow; x += 4) {
            __m256d s = _mm256_setzero_pd();
            for (int k = 0; k < ntaps; ++k)
                s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(row + x + k)));
            _mm256_storeu_pd(orow + x, s);
        }
        for (; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < ntaps; ++k)
                s += taps[k] * row[x + k];
            orow[x] = s;
        }
    }
}

FG_AVX2 void filter_cols(const double* in, int h, int w, const double* taps, int ntaps, double* out)
{
    const int oh = h - ntaps + 1;
    for (int y = 0; y < oh; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            __m256d s = _mm256_setzero_pd();
            for (int k = 0; k < ntaps; ++k)
                s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_set1_pd(taps[k]),
                                                   _mm256_loadu_pd(in + static_cast<std::size_t>(y + k) * w + x)));
            _mm256_storeu_pd(orow + x, s);
        }
        for (; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k < ntaps; ++k)
                s += taps[k] * in[static_cast<std::size_t>(y + k) * w + x];
            orow[x] = s;
        }
    }
}

} // namespace

const KernelTable table{
    Isa::Avx2,        &warp_bilinear, &warp_bilinear_grad, &blend,       &sum_sq_diff,
    &masked_abs_diff, &charbonnier,   &filter_rows,        &filter_cols,
};

} // namespace flowgate::simd::avx2

#endif
