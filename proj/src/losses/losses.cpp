#include "flowgate/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowgate/simd/kernels.hpp"

namespace flowgate {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kLogClamp = 1e-12;

std::vector<double> gaussian_taps(int size, double sigma)
{
    std::vector<double> t(size);
    const int r = size / 2;
    double s = 0.0;
    for (int k = 0; k < size; ++k) {
        const double d = k - r;
        t[k] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        s += t[k];
    }
    for (double& v : t)
        v /= s;
    return t;
}

// Separable valid-mode Gaussian blur of one h x w plane.
std::vector<double> blur_valid(const std::vector<double>& plane, int h, int w, const std::vector<double>& taps)
{
    const int n = static_cast<int>(taps.size());
    const int ow = w - n + 1, oh = h - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    const auto& k = simd::active();
    k.filter_rows(plane.data(), h, w, taps.data(), n, tmp.data());
    k.filter_cols(tmp.data(), h, ow, taps.data(), n, out.data());
    return out;
}

// Nearest-neighbour resample with the same centre convention as resize_bilinear.
OcclusionMap resize_mask_nearest(const OcclusionMap& m, int h, int w)
{
    if (m.height() == h && m.width() == w)
        return m;
    OcclusionMap out(h, w, 0);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(m.height() - 1, static_cast<int>((y + 0.5) * m.height() / h));
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(m.width() - 1, static_cast<int>((x + 0.5) * m.width() / w));
            out.set(y, x, m.at(sy, sx) != 0);
        }
    }
    return out;
}

void check_stacks(const FeatureStack& a, const FeatureStack& b, const char* who)
{
    if (a.empty())
        throw InvalidArgument(std::string(who) + ": empty feature stack");
    if (a.size() != b.size())
        throw ContractError(std::string(who) + ": level count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_shape(b[i]))
            detail::throw_shape_mismatch(who);
}

double charb(double d, double eps) { return std::sqrt(d * d + eps * eps) - eps; }
double charb_deriv(double d, double eps) { return d / std::sqrt(d * d + eps * eps); }

} // namespace

void LossConfig::validate() const
{
    const double w[] = {alpha, beta, lambda_smt, lambda_prc, lambda_sty, lambda_var, lambda_seg};
    for (double v : w)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidArgument("LossConfig: weights must be finite and non-negative");
    if (alpha > 1.0)
        throw InvalidArgument("LossConfig: alpha must lie in [0, 1]");
    if (ssim_window.size < 1 || ssim_window.size % 2 == 0 || !(ssim_window.sigma > 0.0))
        throw InvalidArgument("LossConfig: SSIM window must be odd with positive sigma");
}

SsimResult ssim(const Image& x, const Image& y, const SsimWindow& window)
{
    if (!x.same_shape(y))
        detail::throw_shape_mismatch("ssim");
    if (window.size < 1 || window.size % 2 == 0 || !(window.sigma > 0.0))
        throw InvalidArgument("ssim: window size must be odd and sigma positive");
    SsimResult res;
    if (x.empty())
        return res;

    const int h = x.height(), w = x.width(), c = x.channels();
    int size = std::min(window.size, std::min(h, w));
    if (size % 2 == 0)
        --size;
    const auto taps = gaussian_taps(size, window.sigma);
    const int oh = h - size + 1, ow = w - size + 1;
    res.map = Image(oh, ow, c);

    const std::size_t n = x.pixel_count();
    std::vector<double> px(n), py(n), pxx(n), pyy(n), pxy(n);
    double total = 0.0;
    for (int ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = x.data()[i * c + ch];
            const double b = y.data()[i * c + ch];
            px[i] = a;
            py[i] = b;
            pxx[i] = a * a;
            pyy[i] = b * b;
            pxy[i] = a * b;
        }
        const auto mx = blur_valid(px, h, w, taps);
        const auto my = blur_valid(py, h, w, taps);
        const auto mxx = blur_valid(pxx, h, w, taps);
        const auto myy = blur_valid(pyy, h, w, taps);
        const auto mxy = blur_valid(pxy, h, w, taps);
        for (int yy = 0; yy < oh; ++yy)
            for (int xx = 0; xx < ow; ++xx) {
                const std::size_t i = static_cast<std::size_t>(yy) * ow + xx;
                const double mux = mx[i], muy = my[i];
                const double sxx = mxx[i] - mux * mux;
                const double syy = myy[i] - muy * muy;
                const double sxy = mxy[i] - mux * muy;
                const double num = (2.0 * mux * muy + kC1) * (2.0 * sxy + kC2);
                const double den = (mux * mux + muy * muy + kC1) * (sxx + syy + kC2);
                const double s = num / den;
                res.map.at(yy, xx, ch) = s;
                total += s;
            }
    }
    res.mean = total / static_cast<double>(res.map.size());
    return res;
}

double masked_pixel_loss(const Image& pred, const Image& target, const OcclusionMap& mask, double alpha,
                         Normalization norm, const SsimWindow& window)
{
    if (!pred.same_shape(target) || !mask.same_grid(pred))
        detail::throw_shape_mismatch("masked_pixel_loss");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw InvalidArgument("masked_pixel_loss: alpha must lie in [0, 1]");
    if (pred.empty())
        return 0.0;

    const int c = pred.channels();
    double structural = 0.0;
    if (alpha > 0.0) {
        Image pm(pred.height(), pred.width(), c), tm(pred.height(), pred.width(), c);
        const auto& k = simd::active();
        const Image zero(pred.height(), pred.width(), c);
        k.blend(pred.data().data(), zero.data().data(), mask.data().data(), pred.pixel_count(), c,
                pm.data().data());
        k.blend(target.data().data(), zero.data().data(), mask.data().data(), pred.pixel_count(), c,
                tm.data().data());
        structural = alpha * (1.0 - ssim(pm, tm, window).mean) / 2.0;
    }

    double l1 = simd::active().masked_abs_diff(pred.data().data(), target.data().data(), mask.data().data(),
                                               pred.pixel_count(), c);
    if (norm == Normalization::MeanOverValid) {
        const std::size_t count = mask.count_valid() * static_cast<std::size_t>(c);
        l1 = count == 0 ? 0.0 : l1 / static_cast<double>(count);
    }
    return structural + (1.0 - alpha) * l1;
}

double smoothness_loss(const FlowField& flow, const Image& image, Normalization norm)
{
    if (!flow.same_grid(image))
        detail::throw_shape_mismatch("smoothness_loss");
    const int h = flow.height(), w = flow.width(), c = image.channels();
    if (h == 0 || w == 0)
        return 0.0;
    double total = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) {
                double g = 0.0;
                for (int ch = 0; ch < c; ++ch)
                    g += std::fabs(image.at(y, x + 1, ch) - image.at(y, x, ch));
                const double d = std::fabs(flow.u(y, x + 1) - flow.u(y, x)) + std::fabs(flow.v(y, x + 1) - flow.v(y, x));
                total += d * std::exp(-g / c);
            }
            if (y + 1 < h) {
                double g = 0.0;
                for (int ch = 0; ch < c; ++ch)
                    g += std::fabs(image.at(y + 1, x, ch) - image.at(y, x, ch));
                const double d = std::fabs(flow.u(y + 1, x) - flow.u(y, x)) + std::fabs(flow.v(y + 1, x) - flow.v(y, x));
                total += d * std::exp(-g / c);
            }
        }
    return norm == Normalization::Sum ? total : total / static_cast<double>(flow.pixel_count());
}

double total_variation(const Image& x, Normalization norm)
{
    const int h = x.height(), w = x.width(), c = x.channels();
    if (x.empty())
        return 0.0;
    double total = 0.0;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            double s = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double dx = xx + 1 < w ? x.at(y, xx + 1, ch) - x.at(y, xx, ch) : 0.0;
                const double dy = y + 1 < h ? x.at(y + 1, xx, ch) - x.at(y, xx, ch) : 0.0;
                s += dx * dx + dy * dy;
            }
            total += std::sqrt(s);
        }
    return norm == Normalization::Sum ? total : total / static_cast<double>(x.pixel_count());
}

double perceptual_loss(const FeatureStack& fp, const FeatureStack& ft, const OcclusionMap& mask, double beta)
{
    check_stacks(fp, ft, "perceptual_loss");
    double total = 0.0;
    for (std::size_t n = 0; n < fp.size(); ++n) {
        const Image& a = fp[n];
        const Image& b = ft[n];
        const OcclusionMap m = resize_mask_nearest(mask, a.height(), a.width());
        double in = 0.0, out = 0.0;
        std::size_t cin = 0, cout = 0;
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                double s = 0.0;
                for (int d = 0; d < a.channels(); ++d)
                    s += std::fabs(a.at(y, x, d) - b.at(y, x, d));
                if (m.at(y, x)) {
                    in += s;
                    ++cin;
                } else {
                    out += s;
                    ++cout;
                }
            }
        const double dd = a.channels();
        const double tin = cin ? in / (static_cast<double>(cin) * dd) : 0.0;
        const double tout = cout ? out / (static_cast<double>(cout) * dd) : 0.0;
        total += tin + beta * tout;
    }
    return total / static_cast<double>(fp.size());
}

double style_loss(const FeatureStack& fp, const FeatureStack& ft, const OcclusionMap& mask, double beta)
{
    check_stacks(fp, ft, "style_loss");
    double total = 0.0;
    for (std::size_t n = 0; n < fp.size(); ++n) {
        const Image& a = fp[n];
        const Image& b = ft[n];
        const int d = a.channels();
        const OcclusionMap m = resize_mask_nearest(mask, a.height(), a.width());
        std::vector<double> gin(static_cast<std::size_t>(d) * d, 0.0), gout(gin.size(), 0.0);
        std::size_t cin = 0, cout = 0;
        std::vector<double> diff(d);
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                for (int k = 0; k < d; ++k)
                    diff[k] = a.at(y, x, k) - b.at(y, x, k);
                auto& g = m.at(y, x) ? gin : gout;
                ++(m.at(y, x) ? cin : cout);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        g[static_cast<std::size_t>(i) * d + j] += diff[i] * diff[j];
            }
        auto term = [d](const std::vector<double>& g, std::size_t count) {
            if (count == 0)
                return 0.0;
            double s = 0.0;
            for (double v : g)
                s += std::fabs(v);
            return s / (static_cast<double>(d) * d * static_cast<double>(count));
        };
        total += term(gin, cin) + beta * term(gout, cout);
    }
    return total / static_cast<double>(fp.size());
}

LabelMap LabelMap::from_labels(int h, int w, int k, std::vector<int> labels)
{
    LabelMap m;
    m.height = h;
    m.width = w;
    m.num_classes = k;
    m.labels = std::move(labels);
    m.validate();
    return m;
}

LabelMap LabelMap::from_probs(Image probs)
{
    LabelMap m;
    m.height = probs.height();
    m.width = probs.width();
    m.num_classes = probs.channels();
    m.probs = std::move(probs);
    m.validate();
    return m;
}

void LabelMap::validate() const
{
    if (num_classes < 1)
        throw InvalidArgument("LabelMap: need at least one class");
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (!labels.empty()) {
        if (labels.size() != n)
            throw InvalidArgument("LabelMap: label count does not match dimensions");
        for (int l : labels)
            if (l < 0 || l >= num_classes)
                throw InvalidArgument("LabelMap: label out of range");
    }
    if (!probs.empty()) {
        if (probs.height() != height || probs.width() != width || probs.channels() != num_classes)
            throw InvalidArgument("LabelMap: probability planes do not match dimensions");
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < num_classes; ++k) {
                const double p = probs.data()[i * num_classes + k];
                if (!(p >= 0.0 && p <= 1.0))
                    throw InvalidArgument("LabelMap: probability outside [0, 1]");
                s += p;
            }
            if (std::fabs(s - 1.0) > 1e-5)
                throw InvalidArgument("LabelMap: probabilities do not sum to 1");
        }
    }
}

double masked_cross_entropy(const LabelMap& pred, const LabelMap& target, const OcclusionMap& mask, double beta)
{
    pred.validate();
    target.validate();
    if (pred.probs.empty())
        throw InvalidArgument("masked_cross_entropy: prediction needs probability planes");
    if (target.labels.empty())
        throw InvalidArgument("masked_cross_entropy: target needs labels");
    if (pred.height != target.height || pred.width != target.width || pred.num_classes != target.num_classes ||
        mask.height() != pred.height || mask.width() != pred.width)
        detail::throw_shape_mismatch("masked_cross_entropy");

    double in = 0.0, out = 0.0;
    std::size_t cin = 0, cout = 0;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pred.width + x;
            const double p = pred.probs.data()[i * pred.num_classes + target.labels[i]];
            const double ce = -std::log(std::max(p, kLogClamp));
            if (mask.at(y, x)) {
                in += ce;
                ++cin;
            } else {
                out += ce;
                ++cout;
            }
        }
    const double tin = cin ? in / static_cast<double>(cin) : 0.0;
    const double tout = cout ? out / static_cast<double>(cout) : 0.0;
    return tin + beta * tout;
}

double flow_objective(const Image& pred_frame, const Image& target_frame, const OcclusionMap& mask,
                      const FlowField& flow, const Image& target_img, const LossConfig& cfg)
{
    cfg.validate();
    const double lp = masked_pixel_loss(pred_frame, target_frame, mask, cfg.alpha, cfg.norm, cfg.ssim_window);
    if (cfg.lambda_smt == 0.0)
        return lp;
    return lp + cfg.lambda_smt * smoothness_loss(flow, target_img, cfg.norm);
}

double inpaint_objective(const InpaintTerms& t, const LossConfig& cfg)
{
    cfg.validate();
    return t.pix + cfg.lambda_prc * t.prc + cfg.lambda_sty * t.sty + cfg.lambda_var * t.var +
           cfg.lambda_seg * t.seg;
}

double pixel_reconstruction_loss(const Image& pred, const Image& target, const OcclusionMap& mask,
                                 const LossConfig& cfg)
{
    cfg.validate();
    return masked_pixel_loss(pred, target, mask, cfg.alpha, cfg.norm, cfg.ssim_window) +
           cfg.beta * masked_pixel_loss(pred, target, mask.inverted(), cfg.alpha, cfg.norm, cfg.ssim_window);
}

double charbonnier_photometric(const Image& src, const Image& dst, const FlowField& flow, double eps,
                               std::vector<double>* grad)
{
    flow.require(FlowDirection::Backward, "charbonnier_photometric");
    if (!src.same_shape(dst) || !flow.same_grid(src))
        detail::throw_shape_mismatch("charbonnier_photometric");
    if (src.channels() != 1)
        throw InvalidArgument("charbonnier_photometric: single-channel images expected");
    const std::size_t n = src.pixel_count();
    if (n == 0)
        return 0.0;
    std::vector<double> val(n), dx(n), dy(n);
    const auto& k = simd::active();
    k.warp_bilinear_grad(src.data().data(), src.height(), src.width(), flow.data().data(), val.data(), dx.data(),
                         dy.data());
    for (std::size_t i = 0; i < n; ++i)
        val[i] -= dst.data()[i];
    std::vector<double> deriv(grad ? n : 0);
    const double sum = k.charbonnier(val.data(), n, eps, grad ? deriv.data() : nullptr);
    const double inv = 1.0 / static_cast<double>(n);
    if (grad) {
        grad->assign(2 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            (*grad)[2 * i] = deriv[i] * dx[i] * inv;
            (*grad)[2 * i + 1] = deriv[i] * dy[i] * inv;
        }
    }
    return sum * inv;
}

std::vector<double> smoothness_edge_weights(const Image& image)
{
    const int h = image.height(), w = image.width(), c = image.channels();
    std::vector<double> wt(2 * image.pixel_count(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w) {
                double g = 0.0;
                for (int ch = 0; ch < c; ++ch)
                    g += std::fabs(image.at(y, x + 1, ch) - image.at(y, x, ch));
                wt[2 * p] = std::exp(-g / c);
            }
            if (y + 1 < h) {
                double g = 0.0;
                for (int ch = 0; ch < c; ++ch)
                    g += std::fabs(image.at(y + 1, x, ch) - image.at(y, x, ch));
                wt[2 * p + 1] = std::exp(-g / c);
            }
        }
    return wt;
}

double charbonnier_smoothness_weighted(const FlowField& flow, const std::vector<double>& weights, double eps,
                                       std::vector<double>* grad)
{
    const int h = flow.height(), w = flow.width();
    const std::size_t n = flow.pixel_count();
    if (weights.size() != 2 * n)
        detail::throw_shape_mismatch("charbonnier_smoothness");
    if (grad)
        grad->assign(2 * n, 0.0);
    if (n == 0)
        return 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    const auto f = flow.data();
    double total = 0.0;
    auto edge = [&](std::size_t p, std::size_t q, double wgt) {
        for (int k = 0; k < 2; ++k) {
            const double d = f[2 * q + k] - f[2 * p + k];
            total += wgt * charb(d, eps);
            if (grad) {
                const double g = wgt * charb_deriv(d, eps) * inv;
                (*grad)[2 * q + k] += g;
                (*grad)[2 * p + k] -= g;
            }
        }
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w)
                edge(p, p + 1, weights[2 * p]);
            if (y + 1 < h)
                edge(p, p + w, weights[2 * p + 1]);
        }
    return total * inv;
}

double charbonnier_smoothness(const FlowField& flow, const Image& image, double eps, std::vector<double>* grad)
{
    if (!flow.same_grid(image))
        detail::throw_shape_mismatch("charbonnier_smoothness");
    return charbonnier_smoothness_weighted(flow, smoothness_edge_weights(image), eps, grad);
}

double charbonnier_tv(const Image& img, double eps, std::vector<double>* grad)
{
    const int h = img.height(), w = img.width(), c = img.channels();
    if (grad)
        grad->assign(img.size(), 0.0);
    if (img.empty())
        return 0.0;
    const double inv = 1.0 / static_cast<double>(img.pixel_count());
    double total = 0.0;
    std::vector<double> dx(c), dy(c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = eps * eps;
            for (int ch = 0; ch < c; ++ch) {
                dx[ch] = x + 1 < w ? img.at(y, x + 1, ch) - img.at(y, x, ch) : 0.0;
                dy[ch] = y + 1 < h ? img.at(y + 1, x, ch) - img.at(y, x, ch) : 0.0;
                s += dx[ch] * dx[ch] + dy[ch] * dy[ch];
            }
            const double r = std::sqrt(s);
            total += r - eps;
            if (!grad)
                continue;
            for (int ch = 0; ch < c; ++ch) {
                const double gx = dx[ch] / r * inv;
                const double gy = dy[ch] / r * inv;
                (*grad)[img.index(y, x, ch)] -= gx + gy;
                if (x + 1 < w)
                    (*grad)[img.index(y, x + 1, ch)] += gx;
                if (y + 1 < h)
                    (*grad)[img.index(y + 1, x, ch)] += gy;
            }
        }
    return total * inv;
}

DiffResult loss_gradient(DiffTerm term, const DiffInputs& in)
{
    DiffResult r;
    switch (term) {
    case DiffTerm::CharbonnierPhoto:
        if (!in.src || !in.dst || !in.flow)
            throw InvalidArgument("loss_gradient: photometric term needs src, dst and flow");
        r.value = charbonnier_photometric(*in.src, *in.dst, *in.flow, in.eps, &r.grad);
        return r;
    case DiffTerm::Smoothness:
        if (!in.flow || !in.dst)
            throw InvalidArgument("loss_gradient: smoothness term needs flow and dst");
        r.value = charbonnier_smoothness(*in.flow, *in.dst, in.eps, &r.grad);
        return r;
    case DiffTerm::TotalVariation:
        if (!in.image)
            throw InvalidArgument("loss_gradient: TV term needs image");
        r.value = charbonnier_tv(*in.image, in.eps, &r.grad);
        return r;
    }
    throw InvalidArgument("loss_gradient: unsupported term");
}

} // namespace flowgate
