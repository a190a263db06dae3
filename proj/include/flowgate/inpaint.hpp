#pragma once

#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate {

/// Weights are laid out [c_out][ky][kx][c_in].
struct PartialConvLayer {
    int k = 3;
    int c_in = 1;
    int c_out = 1;
    int stride = 1;
    std::vector<double> weights;
    std::vector<double> bias;

    PartialConvLayer() = default;
    PartialConvLayer(int k, int c_in, int c_out, int stride = 1);

    double& w(int co, int ky, int kx, int ci)
    {
        return weights[((static_cast<std::size_t>(co) * k + ky) * k + kx) * c_in + ci];
    }
    double w(int co, int ky, int kx, int ci) const
    {
        return weights[((static_cast<std::size_t>(co) * k + ky) * k + kx) * c_in + ci];
    }
    void validate() const;
};

struct PartialConvResult {
    Image out;
    OcclusionMap mask;
};

/// Mask-renormalized convolution with zero padding. Each window is scaled by
/// (in-image taps) / (valid taps); pad pixels count in neither. A window with
/// no valid input yields 0 and an updated mask of 0.
PartialConvResult partial_conv(const Image& x, const OcclusionMap& mask, const PartialConvLayer& layer);

/// Ordinary zero-padded convolution with the same layout, for comparison.
Image conv2d(const Image& x, const PartialConvLayer& layer);

/// Pull-push hole filling. Mask-1 pixels are returned untouched, mask-0
/// pixels receive values interpolated from a box-filtered pyramid of the
/// valid samples. Throws InvalidArgument when no pixel is valid.
Frame pullpush_inpaint(const Frame& frame, const OcclusionMap& mask);

/// warped * m + inpainted * (1 - m).
Frame compose(const Frame& warped, const Frame& inpainted, const OcclusionMap& mask);

} // namespace flowgate
