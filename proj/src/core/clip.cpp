#include "flowgate/core/clip.hpp"

namespace flowgate {

void Clip::validate() const
{
    for (const Frame& f : frames)
        if (!f.same_shape(frames.front()))
            throw ContractError("Clip: frames differ in shape");
    for (const FlowField& f : gt_forward) {
        f.require(FlowDirection::Forward, "Clip ground-truth forward flow");
        if (!frames.empty() && !f.same_grid(frames.front()))
            detail::throw_shape_mismatch("Clip ground-truth forward flow");
    }
    for (const FlowField& f : gt_backward) {
        f.require(FlowDirection::Backward, "Clip ground-truth backward flow");
        if (!frames.empty() && !f.same_grid(frames.front()))
            detail::throw_shape_mismatch("Clip ground-truth backward flow");
    }
    for (const OcclusionMap& m : gt_occlusion)
        if (!frames.empty() && !m.same_grid(frames.front()))
            detail::throw_shape_mismatch("Clip ground-truth occlusion");
}

Clip Clip::history(std::size_t n) const
{
    if (n > frames.size())
        throw InvalidArgument("Clip::history: not enough frames");
    Clip c = *this;
    c.frames.resize(n);
    return c;
}

} // namespace flowgate
