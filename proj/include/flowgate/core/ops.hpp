#pragma once

#include <utility>
#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate {

struct ImageGradient {
    Image gx; // x(i, j+1) - x(i, j), last column 0
    Image gy; // x(i+1, j) - x(i, j), last row 0
};

/// Forward differences, zero on the trailing border.
ImageGradient image_gradient(const Image& img);

/// Bilinear resize with edge clamping. Sample positions follow the
/// align-corners-false mapping src = (dst + 0.5) * in/out - 0.5.
Image resize_bilinear(const Image& img, int new_h, int new_w);

/// Resizes both components and rescales u by new_w/w and v by new_h/h.
FlowField resize_flow(const FlowField& flow, int new_h, int new_w);

template <typename T>
struct Pyramid {
    std::vector<T> levels; // level 0 = full resolution

    std::size_t size() const noexcept { return levels.size(); }
    const T& operator[](std::size_t i) const { return levels[i]; }
    const T& coarsest() const { return levels.back(); }
};

/// Halves (ceil) each side until the next level would have a side below min_side.
Pyramid<Image> build_pyramid(const Image& img, int min_side);
Pyramid<FlowField> build_pyramid(const FlowField& flow, int min_side);

/// Number of levels build_pyramid produces for an h x w input.
int pyramid_depth(int h, int w, int min_side);

} // namespace flowgate
