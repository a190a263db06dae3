#pragma once

#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate {

/// Ordered frames with optional ground truth. Ground-truth vectors are indexed
/// by transition: entry k describes frame k -> frame k+1.
struct Clip {
    std::vector<Frame> frames;
    std::vector<FlowField> gt_forward;       // on grid k, Forward
    std::vector<FlowField> gt_backward;      // on grid k+1, Backward
    std::vector<OcclusionMap> gt_occlusion;  // on grid k+1

    int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
    int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }

    /// Uniform frame shapes and consistent ground truth; throws ContractError.
    void validate() const;

    /// First n frames; ground truth is kept so oracles can look ahead.
    Clip history(std::size_t n) const;
};

} // namespace flowgate
