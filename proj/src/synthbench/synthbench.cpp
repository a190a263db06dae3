#include "flowgate/synthbench.hpp"

#include <algorithm>
#include <cmath>

namespace flowgate::synth {

std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) noexcept
{
    std::uint64_t st = seed;
    s_ = splitmix64(st);
    if (s_ == 0)
        s_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next_u64() noexcept
{
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545F4914F6CDD1DULL;
}

double Rng::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi) noexcept
{
    const double span = static_cast<double>(hi) - lo + 1.0;
    return std::min(hi, lo + static_cast<int>(std::floor(uniform() * span)));
}

Image value_noise(int h, int w, int channels, std::uint64_t seed)
{
    Image out(h, w, channels);
    Rng rng(seed);
    constexpr int cells[] = {16, 8, 4};
    constexpr double amps[] = {4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0};
    for (int ch = 0; ch < channels; ++ch)
        for (int o = 0; o < 3; ++o) {
            const int cs = cells[o];
            const int gh = h / cs + 2, gw = w / cs + 2;
            std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
            for (double& v : lattice)
                v = rng.uniform();
            for (int y = 0; y < h; ++y) {
                const int gy = y / cs;
                double ty = static_cast<double>(y % cs) / cs;
                ty = ty * ty * (3.0 - 2.0 * ty);
                for (int x = 0; x < w; ++x) {
                    const int gx = x / cs;
                    double tx = static_cast<double>(x % cs) / cs;
                    tx = tx * tx * (3.0 - 2.0 * tx);
                    auto L = [&](int yy, int xx) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
                    const double top = L(gy, gx) * (1.0 - tx) + L(gy, gx + 1) * tx;
                    const double bot = L(gy + 1, gx) * (1.0 - tx) + L(gy + 1, gx + 1) * tx;
                    out.at(y, x, ch) += amps[o] * (top * (1.0 - ty) + bot * ty);
                }
            }
        }
    return out;
}

void SceneSpec::validate() const
{
    if (canvas_h < 1 || canvas_w < 1 || sprite_h < 1 || sprite_w < 1)
        throw InvalidArgument("SceneSpec: sizes must be positive");
    if (channels != 1 && channels != 3)
        throw InvalidArgument("SceneSpec: channels must be 1 or 3");
    if (num_frames < 3)
        throw InvalidArgument("SceneSpec: at least 3 frames required");
    if (!std::isfinite(vel_u) || !std::isfinite(vel_v) || !std::isfinite(start_x) || !std::isfinite(start_y))
        throw InvalidArgument("SceneSpec: non-finite position or velocity");
    if (allow_clipping)
        return;
    for (int t : {0, num_frames - 1}) {
        const double px = start_x + vel_u * t, py = start_y + vel_v * t;
        if (px < 0.0 || py < 0.0 || px + sprite_w - 1 > canvas_w - 1 || py + sprite_h - 1 > canvas_h - 1)
            throw InvalidArgument("SceneSpec: sprite leaves the canvas and clipping is not allowed");
    }
}

namespace {

// Coverage of a unit-spaced box [0, n-1] sampled bilinearly at s.
double coverage(double s, int n)
{
    return std::clamp(std::min(s + 1.0, static_cast<double>(n) - s), 0.0, 1.0);
}

double sample_clamped(const Image& img, double y, double x, int ch)
{
    y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
    x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
    const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, img.height() - 1), x1 = std::min(x0 + 1, img.width() - 1);
    const double ay = y - y0, ax = x - x0;
    const double top = img.at(y0, x0, ch) * (1.0 - ax) + img.at(y0, x1, ch) * ax;
    const double bot = img.at(y1, x0, ch) * (1.0 - ax) + img.at(y1, x1, ch) * ax;
    return top * (1.0 - ay) + bot * ay;
}

} // namespace

LabeledClip generate_clip(const SceneSpec& spec)
{
    spec.validate();
    Rng rng(spec.seed);
    const std::uint64_t bg_seed = rng.next_u64();
    const std::uint64_t sp_seed = rng.next_u64();

    const int H = spec.canvas_h, W = spec.canvas_w, C = spec.channels;
    Image bg = value_noise(H, W, C, bg_seed);
    Image sprite = value_noise(spec.sprite_h, spec.sprite_w, C, sp_seed);
    // Background in [0.05, 0.5], sprite in [0.5, 0.95]: distinct mean levels.
    for (double& v : bg.data())
        v = 0.05 + 0.45 * v;
    for (double& v : sprite.data())
        v = 0.5 + 0.45 * v;

    LabeledClip out;
    out.spec = spec;
    for (int t = 0; t < spec.num_frames; ++t) {
        const double px = spec.start_x + spec.vel_u * t;
        const double py = spec.start_y + spec.vel_v * t;
        Frame f(H, W, C);
        std::vector<std::uint8_t> fg(static_cast<std::size_t>(H) * W, 0);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double sy = y - py, sx = x - px;
                const double a = coverage(sy, spec.sprite_h) * coverage(sx, spec.sprite_w);
                for (int ch = 0; ch < C; ++ch) {
                    const double b = bg.at(y, x, ch);
                    f.at(y, x, ch) = a > 0.0 ? a * sample_clamped(sprite, sy, sx, ch) + (1.0 - a) * b : b;
                }
                fg[static_cast<std::size_t>(y) * W + x] = a >= 0.5 ? 1 : 0;
            }
        out.clip.frames.push_back(std::move(f));
        out.foreground.push_back(std::move(fg));
    }

    for (int k = 0; k + 1 < spec.num_frames; ++k) {
        FlowField fwd(H, W, FlowDirection::Forward);
        FlowField bwd(H, W, FlowDirection::Backward);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * W + x;
                if (out.foreground[k][i])
                    fwd.set(y, x, {spec.vel_u, spec.vel_v});
                if (out.foreground[k + 1][i])
                    bwd.set(y, x, {-spec.vel_u, -spec.vel_v});
            }
        out.clip.gt_occlusion.push_back(oracle_occlusion(fwd));
        out.clip.gt_forward.push_back(std::move(fwd));
        out.clip.gt_backward.push_back(std::move(bwd));
    }
    return out;
}

OcclusionMap oracle_occlusion(const FlowField& forward, std::vector<double>* energy)
{
    forward.require(FlowDirection::Forward, "oracle_occlusion");
    const int H = forward.height(), W = forward.width();
    std::vector<double> e(static_cast<std::size_t>(H) * W, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double ty = y + forward.v(y, x);
            const double tx = x + forward.u(y, x);
            const double fy = std::floor(ty), fx = std::floor(tx);
            for (int dy = 0; dy < 2; ++dy) {
                const double wy = dy ? ty - fy : 1.0 - (ty - fy);
                const double yy = fy + dy;
                if (yy < 0.0 || yy > H - 1)
                    continue;
                for (int dx = 0; dx < 2; ++dx) {
                    const double wx = dx ? tx - fx : 1.0 - (tx - fx);
                    const double xx = fx + dx;
                    if (xx < 0.0 || xx > W - 1)
                        continue;
                    e[static_cast<std::size_t>(yy) * W + static_cast<std::size_t>(xx)] += wy * wx;
                }
            }
        }
    OcclusionMap m(H, W, 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double v = e[static_cast<std::size_t>(y) * W + x];
            m.set(y, x, v > 1e-6 && v < 2.0 - 1e-6);
        }
    if (energy)
        *energy = std::move(e);
    return m;
}

double iou(const OcclusionMap& a, const OcclusionMap& b, PositiveClass cls)
{
    if (!a.same_grid(b))
        detail::throw_shape_mismatch("iou");
    const std::uint8_t pos = cls == PositiveClass::Occluded ? 0 : 1;
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        const bool pa = a.data()[i] == pos, pb = b.data()[i] == pos;
        inter += pa && pb;
        uni += pa || pb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<SceneSpec> generate_suite(int n, std::uint64_t seed, const SuiteParams& p)
{
    if (n < 0)
        throw InvalidArgument("generate_suite: negative count");
    if (p.sprite_min < 1 || p.sprite_max < p.sprite_min || p.sprite_max > p.canvas || p.max_speed < 0.0 ||
        p.min_speed > p.max_speed * std::sqrt(2.0) || p.num_frames < 3)
        throw InvalidArgument("generate_suite: inconsistent parameters");
    Rng rng(seed);
    std::vector<SceneSpec> specs;
    specs.reserve(n);
    const int T = p.num_frames - 1;
    while (static_cast<int>(specs.size()) < n) {
        SceneSpec s;
        s.seed = rng.next_u64();
        s.canvas_h = s.canvas_w = p.canvas;
        s.channels = p.channels;
        s.num_frames = p.num_frames;
        s.sprite_h = rng.uniform_int(p.sprite_min, p.sprite_max);
        s.sprite_w = rng.uniform_int(p.sprite_min, p.sprite_max);
        if (p.integer_velocity) {
            const int m = static_cast<int>(std::floor(p.max_speed));
            s.vel_u = rng.uniform_int(-m, m);
            s.vel_v = rng.uniform_int(-m, m);
        } else {
            s.vel_u = rng.uniform(-p.max_speed, p.max_speed);
            s.vel_v = rng.uniform(-p.max_speed, p.max_speed);
        }
        if (std::hypot(s.vel_u, s.vel_v) < p.min_speed)
            continue;
        const double lo_x = std::max(0.0, -s.vel_u * T), hi_x = p.canvas - s.sprite_w - std::max(0.0, s.vel_u * T);
        const double lo_y = std::max(0.0, -s.vel_v * T), hi_y = p.canvas - s.sprite_h - std::max(0.0, s.vel_v * T);
        if (hi_x < lo_x || hi_y < lo_y)
            continue;
        if (p.integer_velocity) {
            s.start_x = rng.uniform_int(static_cast<int>(std::ceil(lo_x)), static_cast<int>(std::floor(hi_x)));
            s.start_y = rng.uniform_int(static_cast<int>(std::ceil(lo_y)), static_cast<int>(std::floor(hi_y)));
        } else {
            s.start_x = rng.uniform(lo_x, hi_x);
            s.start_y = rng.uniform(lo_y, hi_y);
        }
        specs.push_back(s);
    }
    return specs;
}

double occluded_fraction(const LabeledClip& clip)
{
    if (clip.clip.gt_occlusion.empty())
        return 0.0;
    const OcclusionMap& m = clip.clip.gt_occlusion.back();
    return 1.0 - static_cast<double>(m.count_valid()) / static_cast<double>(m.pixel_count());
}

std::vector<LabeledClip> generate_filtered_suite(int n, std::uint64_t seed, const SuiteParams& params,
                                                 double min_occluded)
{
    if (n < 0)
        throw InvalidArgument("generate_filtered_suite: negative count");
    // generate_suite draws sequentially, so a longer list extends a shorter one
    const int cap = 50 * n + 100;
    const auto specs = generate_suite(cap, seed, params);
    std::vector<LabeledClip> out;
    for (const SceneSpec& s : specs) {
        if (static_cast<int>(out.size()) == n)
            break;
        LabeledClip c = generate_clip(s);
        if (occluded_fraction(c) >= min_occluded)
            out.push_back(std::move(c));
    }
    if (static_cast<int>(out.size()) < n)
        throw InvalidArgument("generate_filtered_suite: too few scenes pass the occlusion filter");
    return out;
}

} // namespace flowgate::synth
