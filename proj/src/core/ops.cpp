#include "flowgate/core/ops.hpp"

#include <algorithm>
#include <cmath>

namespace flowgate {

namespace {

struct Tap {
    int i0;
    int i1;
    double a; // weight of i1
};

std::vector<Tap> resize_taps(int in, int out)
{
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
        const double s = (d + 0.5) * scale - 0.5;
        const double f = std::floor(s);
        const int k = static_cast<int>(f);
        taps[d] = {std::clamp(k, 0, in - 1), std::clamp(k + 1, 0, in - 1), s - f};
    }
    return taps;
}

int half_up(int n) { return (n + 1) / 2; }

} // namespace

ImageGradient image_gradient(const Image& img)
{
    const int h = img.height(), w = img.width(), c = img.channels();
    ImageGradient g{Image(h, w, c), Image(h, w, c)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                const double v = img.at(y, x, ch);
                if (x + 1 < w)
                    g.gx.at(y, x, ch) = img.at(y, x + 1, ch) - v;
                if (y + 1 < h)
                    g.gy.at(y, x, ch) = img.at(y + 1, x, ch) - v;
            }
    return g;
}

Image resize_bilinear(const Image& img, int new_h, int new_w)
{
    if (new_h < 1 || new_w < 1)
        throw InvalidArgument("resize_bilinear: target dimensions must be >= 1");
    if (img.empty())
        throw InvalidArgument("resize_bilinear: empty input");
    if (new_h == img.height() && new_w == img.width())
        return img;

    const int c = img.channels();
    const std::vector<Tap> tx = resize_taps(img.width(), new_w);
    const std::vector<Tap> ty = resize_taps(img.height(), new_h);
    Image out(new_h, new_w, c);
    for (int y = 0; y < new_h; ++y) {
        const Tap& r = ty[y];
        for (int x = 0; x < new_w; ++x) {
            const Tap& q = tx[x];
            for (int ch = 0; ch < c; ++ch) {
                const double top = img.at(r.i0, q.i0, ch) * (1.0 - q.a) + img.at(r.i0, q.i1, ch) * q.a;
                const double bot = img.at(r.i1, q.i0, ch) * (1.0 - q.a) + img.at(r.i1, q.i1, ch) * q.a;
                out.at(y, x, ch) = top * (1.0 - r.a) + bot * r.a;
            }
        }
    }
    return out;
}

FlowField resize_flow(const FlowField& flow, int new_h, int new_w)
{
    Image uv(flow.height(), flow.width(), 2);
    std::copy(flow.data().begin(), flow.data().end(), uv.data().begin());
    const Image r = resize_bilinear(uv, new_h, new_w);
    const double su = static_cast<double>(new_w) / flow.width();
    const double sv = static_cast<double>(new_h) / flow.height();
    FlowField out(new_h, new_w, flow.direction());
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x)
            out.set(y, x, {r.at(y, x, 0) * su, r.at(y, x, 1) * sv});
    return out;
}

int pyramid_depth(int h, int w, int min_side)
{
    if (min_side < 4)
        throw InvalidArgument("build_pyramid: min_side must be >= 4");
    int levels = 1;
    while (std::min(half_up(h), half_up(w)) >= min_side && (h > 1 || w > 1)) {
        h = half_up(h);
        w = half_up(w);
        ++levels;
    }
    return levels;
}

Pyramid<Image> build_pyramid(const Image& img, int min_side)
{
    const int depth = pyramid_depth(img.height(), img.width(), min_side);
    Pyramid<Image> p;
    p.levels.reserve(depth);
    p.levels.push_back(img);
    for (int l = 1; l < depth; ++l) {
        const Image& prev = p.levels.back();
        p.levels.push_back(resize_bilinear(prev, half_up(prev.height()), half_up(prev.width())));
    }
    return p;
}

Pyramid<FlowField> build_pyramid(const FlowField& flow, int min_side)
{
    const int depth = pyramid_depth(flow.height(), flow.width(), min_side);
    Pyramid<FlowField> p;
    p.levels.reserve(depth);
    p.levels.push_back(flow);
    for (int l = 1; l < depth; ++l) {
        const FlowField& prev = p.levels.back();
        p.levels.push_back(resize_flow(prev, half_up(prev.height()), half_up(prev.width())));
    }
    return p;
}

} // namespace flowgate
