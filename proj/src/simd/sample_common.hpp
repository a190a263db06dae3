#pragma once

// Per-pixel bilinear sampling shared by the scalar kernels and the tails of
// the vector kernels. The vector code reproduces these expressions lane-wise.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "flowgate/simd/kernels.hpp"

namespace flowgate::simd {

struct Cell {
    int i0;      // clamped lower index
    int i1;      // clamped upper index
    double frac; // weight of i1
    bool in0;    // unclamped lower index inside [0, n)
    bool in1;
};

// The coordinate is first limited to [-2, n+1]; that keeps integer conversion
// safe for any finite flow and does not change which neighbours are in range.
inline Cell make_cell(double s, int n) noexcept
{
    s = std::min(std::max(s, -2.0), static_cast<double>(n + 1));
    const double f = std::floor(s);
    const int k = static_cast<int>(f);
    Cell c;
    c.frac = s - f;
    c.in0 = k >= 0 && k <= n - 1;
    c.in1 = k + 1 >= 0 && k + 1 <= n - 1;
    c.i0 = std::clamp(k, 0, n - 1);
    c.i1 = std::clamp(k + 1, 0, n - 1);
    return c;
}

inline void warp_pixel(const double* src, int h, int w, int c, int x, int y, double u, double v, BorderMode border,
                       double* out) noexcept
{
    const Cell cx = make_cell(static_cast<double>(x) + u, w);
    const Cell cy = make_cell(static_cast<double>(y) + v, h);
    const double ax = cx.frac, ay = cy.frac;
    const double bx = 1.0 - ax, by = 1.0 - ay;
    const bool zero = border == BorderMode::Zero;
    const bool ok00 = !zero || (cy.in0 && cx.in0);
    const bool ok01 = !zero || (cy.in0 && cx.in1);
    const bool ok10 = !zero || (cy.in1 && cx.in0);
    const bool ok11 = !zero || (cy.in1 && cx.in1);
    const std::size_t r0 = static_cast<std::size_t>(cy.i0) * w;
    const std::size_t r1 = static_cast<std::size_t>(cy.i1) * w;
    for (int ch = 0; ch < c; ++ch) {
        const double v00 = ok00 ? src[(r0 + cx.i0) * c + ch] : 0.0;
        const double v01 = ok01 ? src[(r0 + cx.i1) * c + ch] : 0.0;
        const double v10 = ok10 ? src[(r1 + cx.i0) * c + ch] : 0.0;
        const double v11 = ok11 ? src[(r1 + cx.i1) * c + ch] : 0.0;
        const double top = v00 * bx + v01 * ax;
        const double bot = v10 * bx + v11 * ax;
        out[ch] = top * by + bot * ay;
    }
}

inline void warp_grad_pixel(const double* src, int h, int w, int x, int y, double u, double v, double* val,
                            double* dx, double* dy) noexcept
{
    const Cell cx = make_cell(static_cast<double>(x) + u, w);
    const Cell cy = make_cell(static_cast<double>(y) + v, h);
    const double ax = cx.frac, ay = cy.frac;
    const double bx = 1.0 - ax, by = 1.0 - ay;
    const std::size_t r0 = static_cast<std::size_t>(cy.i0) * w;
    const std::size_t r1 = static_cast<std::size_t>(cy.i1) * w;
    const double v00 = src[r0 + cx.i0];
    const double v01 = src[r0 + cx.i1];
    const double v10 = src[r1 + cx.i0];
    const double v11 = src[r1 + cx.i1];
    const double top = v00 * bx + v01 * ax;
    const double bot = v10 * bx + v11 * ax;
    *val = top * by + bot * ay;
    *dx = (v01 - v00) * by + (v11 - v10) * ay;
    *dy = (v10 - v00) * bx + (v11 - v01) * ax;
}

} // namespace flowgate::simd
