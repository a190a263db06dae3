#include "flowgate/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "sample_common.hpp"

namespace flowgate::simd::scalar {

namespace {

void warp_bilinear(const double* src, int h, int w, int c, const double* flow, BorderMode border, double* dst)
{
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            warp_pixel(src, h, w, c, x, y, flow[2 * p], flow[2 * p + 1], border, dst + p * c);
        }
}

void warp_bilinear_grad(const double* src, int h, int w, const double* flow, double* val, double* dval_dx,
                        double* dval_dy)
{
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            warp_grad_pixel(src, h, w, x, y, flow[2 * p], flow[2 * p + 1], val + p, dval_dx + p, dval_dy + p);
        }
}

void blend(const double* a, const double* b, const std::uint8_t* mask, std::size_t pixels, int c, double* out)
{
    for (std::size_t p = 0; p < pixels; ++p) {
        const double m = mask[p] ? 1.0 : 0.0;
        const double n = 1.0 - m;
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t i = p * c + ch;
            out[i] = a[i] * m + b[i] * n;
        }
    }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double masked_abs_diff(const double* a, const double* b, const std::uint8_t* mask, std::size_t pixels, int c)
{
    double s = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        const double m = mask[p] ? 1.0 : 0.0;
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t i = p * c + ch;
            s += __builtin_fabs(a[i] * m - b[i] * m);
        }
    }
    return s;
}

double charbonnier(const double* r, std::size_t n, double eps, double* deriv)
{
    const double e2 = eps * eps;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = std::sqrt(r[i] * r[i] + e2);
        s += q - eps;
        if (deriv)
            deriv[i] = r[i] / q;
    }
    return s;
}

void filter_rows(const double* in, int h, int w, const double* taps, int ntaps, double* out)
{
    const int ow = w - ntaps + 1;
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < ntaps; ++k)
                s += taps[k] * row[x + k];
            orow[x] = s;
        }
    }
}

void filter_cols(const double* in, int h, int w, const double* taps, int ntaps, double* out)
{
    const int oh = h - ntaps + 1;
    for (int y = 0; y < oh; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k < ntaps; ++k)
                s += taps[k] * in[static_cast<std::size_t>(y + k) * w + x];
            orow[x] = s;
        }
    }
}

} // namespace

const KernelTable table{
    Isa::Scalar,     &warp_bilinear,   &warp_bilinear_grad, &blend,      &sum_sq_diff,
    &masked_abs_diff, &charbonnier,    &filter_rows,        &filter_cols,
};

} // namespace flowgate::simd::scalar
