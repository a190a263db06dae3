#include "flowgate/warpcore.hpp"

#include <cmath>

namespace flowgate {

Frame backward_warp(const Image& src, const FlowField& flow, BorderMode border)
{
    flow.require(FlowDirection::Backward, "backward_warp");
    if (!flow.same_grid(src))
        detail::throw_shape_mismatch("backward_warp");
    Frame out(src.height(), src.width(), src.channels());
    if (src.empty())
        return out;
    simd::active().warp_bilinear(src.data().data(), src.height(), src.width(), src.channels(),
                                 flow.data().data(), border, out.data().data());
    return out;
}

EnergyMap splat_energy(const FlowField& flow)
{
    flow.require(FlowDirection::Forward, "splat_energy");
    const int h = flow.height(), w = flow.width();
    EnergyMap e(h, w, 0.0);
    // Scatter with data-dependent conflicts; kept scalar and strictly ordered.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double ty = y + flow.v(y, x);
            const double tx = x + flow.u(y, x);
            if (!(tx > -1.0 && tx < w && ty > -1.0 && ty < h))
                continue;
            const double fy = std::floor(ty), fx = std::floor(tx);
            const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
            const double ay = ty - fy, ax = tx - fx;
            const double wts[4] = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            for (int k = 0; k < 4; ++k)
                if (ys[k] >= 0 && ys[k] < h && xs[k] >= 0 && xs[k] < w)
                    e.at(ys[k], xs[k]) += wts[k];
        }
    }
    return e;
}

OcclusionMap occlusion_from_energy(const EnergyMap& energy, const OcclusionThresholds& t)
{
    if (!(t.lo < t.hi))
        throw InvalidArgument("occlusion_from_energy: lo must be < hi");
    const double lo = t.lo + t.eps;
    const double hi = t.hi - t.eps;
    OcclusionMap m(energy.height(), energy.width(), 0);
    for (int y = 0; y < energy.height(); ++y)
        for (int x = 0; x < energy.width(); ++x) {
            const double e = energy.at(y, x);
            m.set(y, x, e > lo && e < hi);
        }
    return m;
}

OcclusionResult occlusion_pipeline(const FlowField& forward_flow)
{
    OcclusionResult r;
    r.energy = splat_energy(forward_flow);
    r.mask = occlusion_from_energy(r.energy);
    return r;
}

} // namespace flowgate
