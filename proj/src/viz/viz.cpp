#include "flowgate/viz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace flowgate::viz {

namespace {

using Rgb = std::array<double, 3>;

std::vector<Rgb> make_wheel()
{
    constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
    std::vector<Rgb> w;
    for (int i = 0; i < RY; ++i) w.push_back({255, 255.0 * i / RY, 0});
    for (int i = 0; i < YG; ++i) w.push_back({255 - 255.0 * i / YG, 255, 0});
    for (int i = 0; i < GC; ++i) w.push_back({0, 255, 255.0 * i / GC});
    for (int i = 0; i < CB; ++i) w.push_back({0, 255 - 255.0 * i / CB, 255});
    for (int i = 0; i < BM; ++i) w.push_back({255.0 * i / BM, 0, 255});
    for (int i = 0; i < MR; ++i) w.push_back({255, 0, 255 - 255.0 * i / MR});
    return w;
}

const std::vector<Rgb>& wheel()
{
    static const std::vector<Rgb> w = make_wheel();
    return w;
}

} // namespace

Rgb wheel_color(double u, double v)
{
    const auto& w = wheel();
    const int ncols = static_cast<int>(w.size());
    const double rad = std::sqrt(u * u + v * v);
    const double a = std::atan2(-v, -u) / std::numbers::pi;
    const double fk = (a + 1.0) / 2.0 * (ncols - 1);
    const int k0 = static_cast<int>(std::floor(fk));
    const int k1 = (k0 + 1) % ncols;
    const double f = fk - k0;
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        double col = (1.0 - f) * w[k0][c] / 255.0 + f * w[k1][c] / 255.0;
        if (rad <= 1.0)
            col = 1.0 - rad * (1.0 - col); // desaturate toward the centre
        else
            col *= 0.75;
        out[c] = col;
    }
    return out;
}

Frame flow_to_color(const FlowField& flow, double max_radius)
{
    if (max_radius <= 0.0) {
        max_radius = 0.0;
        for (int y = 0; y < flow.height(); ++y)
            for (int x = 0; x < flow.width(); ++x)
                max_radius = std::max(max_radius, std::hypot(flow.u(y, x), flow.v(y, x)));
    }
    const double scale = max_radius > 0.0 ? 1.0 / max_radius : 0.0;
    Frame out(flow.height(), flow.width(), 3);
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            const Rgb c = wheel_color(flow.u(y, x) * scale, flow.v(y, x) * scale);
            for (int k = 0; k < 3; ++k)
                out.at(y, x, k) = c[k];
        }
    return out;
}

Frame overlay_mask(const Frame& frame, const OcclusionMap& mask)
{
    if (!mask.same_grid(frame))
        detail::throw_shape_mismatch("overlay_mask");
    constexpr Rgb yellow{1.0, 1.0, 0.0};
    Frame out(frame.height(), frame.width(), 3);
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x)
            for (int k = 0; k < 3; ++k) {
                const double v = frame.at(y, x, frame.channels() == 3 ? k : 0);
                out.at(y, x, k) = mask.at(y, x) ? v : 0.5 * v + 0.5 * yellow[k];
            }
    return out;
}

} // namespace flowgate::viz
