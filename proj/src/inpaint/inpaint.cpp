#include "flowgate/inpaint.hpp"

#include <algorithm>
#include <cmath>

#include "flowgate/simd/kernels.hpp"

namespace flowgate {

PartialConvLayer::PartialConvLayer(int k_, int c_in_, int c_out_, int stride_)
    : k(k_), c_in(c_in_), c_out(c_out_), stride(stride_),
      weights(static_cast<std::size_t>(c_out_) * k_ * k_ * c_in_, 0.0), bias(c_out_, 0.0)
{
}

void PartialConvLayer::validate() const
{
    if (k < 1 || k % 2 == 0)
        throw InvalidArgument("partial_conv: kernel size must be odd");
    if (c_in < 1 || c_out < 1 || stride < 1)
        throw InvalidArgument("partial_conv: channel counts and stride must be positive");
    if (weights.size() != static_cast<std::size_t>(c_out) * k * k * c_in || bias.size() != static_cast<std::size_t>(c_out))
        throw InvalidArgument("partial_conv: weight or bias size does not match layer shape");
    for (double v : weights)
        if (!std::isfinite(v))
            throw InvalidArgument("partial_conv: non-finite weight");
}

namespace {

template <typename MaskAt>
PartialConvResult convolve(const Image& x, const PartialConvLayer& L, MaskAt mask_at)
{
    L.validate();
    if (x.channels() != L.c_in)
        throw ContractError("partial_conv: input channels do not match layer");
    const int h = x.height(), w = x.width(), r = L.k / 2;
    const int oh = (h - 1) / L.stride + 1, ow = (w - 1) / L.stride + 1;
    PartialConvResult res{Image(oh, ow, L.c_out), OcclusionMap(oh, ow, 0)};
    std::vector<double> acc(L.c_out);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const int cy = oy * L.stride, cx = ox * L.stride;
            std::fill(acc.begin(), acc.end(), 0.0);
            // Pad taps are holes but also drop out of K, so a full mask
            // reproduces zero-padded convolution at the border too.
            double msum = 0.0, K = 0.0;
            for (int ky = 0; ky < L.k; ++ky) {
                const int y = cy + ky - r;
                if (y < 0 || y >= h)
                    continue;
                for (int kx = 0; kx < L.k; ++kx) {
                    const int xx = cx + kx - r;
                    if (xx < 0 || xx >= w)
                        continue;
                    K += L.c_in;
                    if (!mask_at(y, xx))
                        continue;
                    msum += L.c_in;
                    for (int co = 0; co < L.c_out; ++co)
                        for (int ci = 0; ci < L.c_in; ++ci)
                            acc[co] += L.w(co, ky, kx, ci) * x.at(y, xx, ci);
                }
            }
            if (msum == 0.0)
                continue;
            const double scale = K / msum;
            for (int co = 0; co < L.c_out; ++co)
                res.out.at(oy, ox, co) = acc[co] * scale + L.bias[co];
            res.mask.set(oy, ox, true);
        }
    return res;
}

} // namespace

PartialConvResult partial_conv(const Image& x, const OcclusionMap& mask, const PartialConvLayer& layer)
{
    if (!mask.same_grid(x))
        detail::throw_shape_mismatch("partial_conv");
    return convolve(x, layer, [&](int y, int xx) { return mask.at(y, xx) != 0; });
}

Image conv2d(const Image& x, const PartialConvLayer& layer)
{
    layer.validate();
    if (x.channels() != layer.c_in)
        throw ContractError("conv2d: input channels do not match layer");
    const int h = x.height(), w = x.width(), r = layer.k / 2;
    const int oh = (h - 1) / layer.stride + 1, ow = (w - 1) / layer.stride + 1;
    Image out(oh, ow, layer.c_out);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
            for (int co = 0; co < layer.c_out; ++co) {
                double s = 0.0;
                for (int ky = 0; ky < layer.k; ++ky)
                    for (int kx = 0; kx < layer.k; ++kx) {
                        const int y = oy * layer.stride + ky - r, xx = ox * layer.stride + kx - r;
                        if (y < 0 || y >= h || xx < 0 || xx >= w)
                            continue;
                        for (int ci = 0; ci < layer.c_in; ++ci)
                            s += layer.w(co, ky, kx, ci) * x.at(y, xx, ci);
                    }
                out.at(oy, ox, co) = s + layer.bias[co];
            }
    return out;
}

namespace {

// One pyramid level: premultiplied sums and their weights.
struct Level {
    int h = 0, w = 0, c = 0;
    std::vector<double> val; // h*w*c
    std::vector<double> wt;  // h*w
};

Level pull(const Level& f)
{
    Level g;
    g.h = (f.h + 1) / 2;
    g.w = (f.w + 1) / 2;
    g.c = f.c;
    g.val.assign(static_cast<std::size_t>(g.h) * g.w * g.c, 0.0);
    g.wt.assign(static_cast<std::size_t>(g.h) * g.w, 0.0);
    for (int y = 0; y < f.h; ++y)
        for (int x = 0; x < f.w; ++x) {
            const std::size_t fi = static_cast<std::size_t>(y) * f.w + x;
            const std::size_t gi = static_cast<std::size_t>(y / 2) * g.w + x / 2;
            g.wt[gi] += f.wt[fi];
            for (int ch = 0; ch < f.c; ++ch)
                g.val[gi * g.c + ch] += f.val[fi * f.c + ch];
        }
    return g;
}

bool all_positive(const std::vector<double>& w)
{
    return std::all_of(w.begin(), w.end(), [](double v) { return v > 0.0; });
}

// Bilinear sample of a filled coarse level at the centre of fine pixel (y, x).
// Coarse pixel Y covers fine pixels 2Y and 2Y+1, so its centre sits at fine 2Y + 0.5.
void sample_coarse(const std::vector<double>& filled, int ch_, int gh, int gw, int y, int x, double* out)
{
    auto cell = [](double s, int n, int& i0, int& i1, double& a) {
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        const double f = std::floor(s);
        i0 = static_cast<int>(f);
        i1 = std::min(i0 + 1, n - 1);
        a = s - f;
    };
    int y0, y1, x0, x1;
    double ay, ax;
    cell((y + 0.5) * 0.5 - 0.5, gh, y0, y1, ay);
    cell((x + 0.5) * 0.5 - 0.5, gw, x0, x1, ax);
    for (int ch = 0; ch < ch_; ++ch) {
        auto at = [&](int yy, int xx) { return filled[(static_cast<std::size_t>(yy) * gw + xx) * ch_ + ch]; };
        const double top = at(y0, x0) * (1.0 - ax) + at(y0, x1) * ax;
        const double bot = at(y1, x0) * (1.0 - ax) + at(y1, x1) * ax;
        out[ch] = top * (1.0 - ay) + bot * ay;
    }
}

} // namespace

Frame pullpush_inpaint(const Frame& frame, const OcclusionMap& mask)
{
    if (!mask.same_grid(frame))
        detail::throw_shape_mismatch("pullpush_inpaint");
    if (frame.empty())
        return frame;
    if (mask.count_valid() == mask.pixel_count())
        return frame;
    if (mask.count_valid() == 0)
        throw InvalidArgument("pullpush_inpaint: no valid pixel to fill from");

    const int c = frame.channels();
    std::vector<Level> levels(1);
    Level& base = levels[0];
    base.h = frame.height();
    base.w = frame.width();
    base.c = c;
    base.val.resize(frame.size());
    base.wt.resize(frame.pixel_count());
    for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
        const double m = mask.data()[i] ? 1.0 : 0.0;
        base.wt[i] = m;
        for (int ch = 0; ch < c; ++ch)
            base.val[i * c + ch] = frame.data()[i * c + ch] * m;
    }
    while (!all_positive(levels.back().wt))
        levels.push_back(pull(levels.back()));

    // Push: normalized values, holes filled from the next coarser level.
    const Level& top = levels.back();
    std::vector<double> filled(top.val.size());
    for (std::size_t i = 0; i < top.wt.size(); ++i)
        for (int ch = 0; ch < c; ++ch)
            filled[i * c + ch] = top.val[i * c + ch] / top.wt[i];
    for (int l = static_cast<int>(levels.size()) - 2; l >= 0; --l) {
        const Level& f = levels[l];
        const Level& g = levels[l + 1];
        std::vector<double> next(f.val.size());
        for (int y = 0; y < f.h; ++y)
            for (int x = 0; x < f.w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * f.w + x;
                if (f.wt[i] > 0.0) {
                    for (int ch = 0; ch < c; ++ch)
                        next[i * c + ch] = f.val[i * c + ch] / f.wt[i];
                } else {
                    sample_coarse(filled, c, g.h, g.w, y, x, &next[i * c]);
                }
            }
        filled = std::move(next);
    }

    Frame out = frame;
    auto od = out.data();
    for (std::size_t i = 0; i < frame.pixel_count(); ++i)
        if (!mask.data()[i])
            for (int ch = 0; ch < c; ++ch)
                od[i * c + ch] = std::clamp(filled[i * c + ch], 0.0, 1.0);
    return out;
}

Frame compose(const Frame& warped, const Frame& inpainted, const OcclusionMap& mask)
{
    if (!warped.same_shape(inpainted) || !mask.same_grid(warped))
        detail::throw_shape_mismatch("compose");
    Frame out(warped.height(), warped.width(), warped.channels());
    if (warped.empty())
        return out;
    simd::active().blend(warped.data().data(), inpainted.data().data(), mask.data().data(), warped.pixel_count(),
                         warped.channels(), out.data().data());
    return out;
}

} // namespace flowgate
