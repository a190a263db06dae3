#pragma once

#include <array>

#include "flowgate/core/image.hpp"

namespace flowgate::viz {

/// Middlebury colour wheel (55 hues: RY 15, YG 6, GC 4, CB 11, BM 13, MR 6).
/// Vectors are divided by max_radius; max_radius <= 0 uses the largest
/// magnitude in the field. Magnitudes beyond 1 are drawn at 75% brightness.
Frame flow_to_color(const FlowField& flow, double max_radius = 0.0);

/// RGB for a single normalized vector, components in [0,1].
std::array<double, 3> wheel_color(double u, double v);

/// Mask-0 pixels blended 50/50 with yellow; mask-1 pixels unchanged (gray
/// input is expanded to RGB).
Frame overlay_mask(const Frame& frame, const OcclusionMap& mask);

} // namespace flowgate::viz
