#pragma once

#include "flowgate/core/image.hpp"
#include "flowgate/simd/kernels.hpp"

namespace flowgate {

/// out(i,j) = src sampled bilinearly at (i + v(i,j), j + u(i,j)).
///
/// `flow` must be tagged Backward and live on the output grid. Zero flow is an
/// exact identity for both border modes.
Frame backward_warp(const Image& src, const FlowField& flow, BorderMode border = BorderMode::Clamp);

/// Forward density splat.
///
/// Every source pixel carries unit mass to (i + v, j + u) and spreads it over
/// the four surrounding integer pixels with bilinear weights. Corners that fall
/// outside the grid lose their share; nothing is renormalized. Sources are
/// visited in row-major order so the sum is reproducible.
EnergyMap splat_energy(const FlowField& flow);

struct OcclusionThresholds {
    double lo = 0.0;
    double hi = 2.0;
    double eps = 1e-6;
};

/// mask = 1 iff lo + eps < E < hi - eps.
OcclusionMap occlusion_from_energy(const EnergyMap& energy, const OcclusionThresholds& t = {});

struct OcclusionResult {
    EnergyMap energy;
    OcclusionMap mask;
};

/// splat_energy followed by occlusion_from_energy with default thresholds.
OcclusionResult occlusion_pipeline(const FlowField& forward_flow);

} // namespace flowgate
