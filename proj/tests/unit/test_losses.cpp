#include <doctest.h>

#include <cmath>
#include <random>

#include "flowgate/losses.hpp"
#include "flowgate/warpcore.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace flowgate;
using namespace fgtest;

TEST_CASE("ssim basics")
{
    std::mt19937_64 rng(20);
    const Image x = random_image(24, 20, 3, rng);
    const Image y = random_image(24, 20, 3, rng);
    CHECK(std::abs(ssim(x, x).mean - 1.0) <= 1e-9);
    CHECK(ssim(x, y).mean == ssim(y, x).mean);
    CHECK(ssim(x, y).map.height() == 14);
    CHECK_THROWS_AS(ssim(x, Image(24, 20, 1)), ContractError);
}

TEST_CASE("ssim matches the direct formula")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 3; ++t) {
        const Image x = random_image(32, 32, 1, rng);
        Image y = x;
        for (double& v : y.data())
            v = std::clamp(v + std::uniform_real_distribution<double>(-0.3, 0.3)(rng), 0.0, 1.0);
        CHECK(std::abs(ssim(x, y).mean - ssim_oracle(x, y, 11, 1.5)) < 1e-6);
        const Image z = random_image(32, 32, 1, rng);
        CHECK(std::abs(ssim(x, z).mean - ssim_oracle(x, z, 11, 1.5)) < 1e-6);
    }
    for (simd::Isa isa : {simd::Isa::Scalar, simd::best_supported()}) {
        simd::ScopedIsa s(isa);
        const Image a = random_image(17, 23, 3, rng), b = random_image(17, 23, 3, rng);
        CHECK(std::abs(ssim(a, b, {7, 1.2}).mean - ssim_oracle(a, b, 7, 1.2)) < 1e-6);
    }
}

TEST_CASE("ssim shrinks the window on small images")
{
    std::mt19937_64 rng(22);
    const Image a = random_image(6, 9, 1, rng), b = random_image(6, 9, 1, rng);
    CHECK(std::abs(ssim(a, b).mean - ssim_oracle(a, b, 5, 1.5)) < 1e-6);
}

TEST_CASE("masked_pixel_loss examples")
{
    std::mt19937_64 rng(23);
    const Image p = random_image(12, 12, 3, rng);
    const OcclusionMap m = random_mask(12, 12, rng);
    CHECK(masked_pixel_loss(p, p, m, 0.9) == doctest::Approx(0.0).epsilon(1e-12));
    const Image t = random_image(12, 12, 3, rng);
    CHECK(masked_pixel_loss(p, t, OcclusionMap(12, 12, 0), 0.9) == 0.0);

    OcclusionMap m1(1, 2, 0);
    m1.set(0, 0, true);
    CHECK(masked_pixel_loss(from_rows(1, 2, {1, 0}), from_rows(1, 2, {0, 0}), m1, 0.0) == 1.0);
}

TEST_CASE("masked L1 splits exactly under Sum normalization")
{
    std::mt19937_64 rng(24);
    for (int t = 0; t < 20; ++t) {
        const Image p = random_image(9, 7, 3, rng), q = random_image(9, 7, 3, rng);
        const OcclusionMap m = random_mask(9, 7, rng);
        const double a = masked_pixel_loss(p, q, m, 0.0, Normalization::Sum);
        const double b = masked_pixel_loss(p, q, m.inverted(), 0.0, Normalization::Sum);
        const double all = masked_pixel_loss(p, q, OcclusionMap(9, 7, 1), 0.0, Normalization::Sum);
        CHECK(a + b == doctest::Approx(all).epsilon(1e-13));
        // MeanOverValid: the same identity after restoring the denominators
        const double am = masked_pixel_loss(p, q, m, 0.0) * m.count_valid() * 3;
        const double bm = masked_pixel_loss(p, q, m.inverted(), 0.0) * (63 - m.count_valid()) * 3;
        CHECK(am + bm == doctest::Approx(all).epsilon(1e-12));
    }
}

TEST_CASE("masked L1 monotonicity in a single pixel")
{
    std::mt19937_64 rng(25);
    const Image t = random_image(5, 5, 1, rng);
    Image p = t;
    OcclusionMap m(5, 5, 1);
    m.set(2, 3, false);
    p.at(1, 1) = t.at(1, 1) + 0.1;
    p.at(2, 3) = t.at(2, 3) + 0.1;
    const double base = masked_pixel_loss(p, t, m, 0.0);
    Image q = p;
    q.at(1, 1) = t.at(1, 1) + 0.2;
    CHECK(masked_pixel_loss(q, t, m, 0.0) > base);
    q = p;
    q.at(2, 3) = t.at(2, 3) + 0.5;
    CHECK(masked_pixel_loss(q, t, m, 0.0) == base);
}

TEST_CASE("smoothness_loss examples")
{
    std::mt19937_64 rng(26);
    const Image img = random_image(6, 6, 3, rng);
    CHECK(smoothness_loss(FlowField(6, 6, FlowDirection::Backward, {1.5, -2}), img) == 0.0);

    FlowField f(1, 3, FlowDirection::Backward);
    f.u(0, 1) = 1;
    f.u(0, 2) = 2;
    const double flat = smoothness_loss(f, Image(1, 3, 1, 0.5));
    CHECK(flat == doctest::Approx(2.0 / 3.0));
    FlowField step(1, 3, FlowDirection::Backward);
    step.u(0, 2) = 2; // one discontinuity, same total variation of u
    const double stepped = smoothness_loss(step, from_rows(1, 3, {0.0, 0.0, 1.0}));
    CHECK(stepped == doctest::Approx(2.0 * std::exp(-1.0) / 3.0));
    CHECK(stepped < smoothness_loss(step, Image(1, 3, 1, 0.0)));
}

TEST_CASE("total_variation examples")
{
    CHECK(total_variation(Image(4, 5, 3, 0.2)) == 0.0);
    // per-position isotropic magnitudes with zero trailing differences
    const Image x = from_rows(2, 2, {0, 1, 0, 1});
    double oracle = 0.0;
    for (int y = 0; y < 2; ++y)
        for (int xx = 0; xx < 2; ++xx) {
            const double dx = xx + 1 < 2 ? x.at(y, xx + 1) - x.at(y, xx) : 0.0;
            const double dy = y + 1 < 2 ? x.at(y + 1, xx) - x.at(y, xx) : 0.0;
            oracle += std::sqrt(dx * dx + dy * dy);
        }
    CHECK(total_variation(x, Normalization::Sum) == oracle);
    CHECK(total_variation(x) == 0.5);

    std::mt19937_64 rng(27);
    for (int t = 0; t < 10; ++t) {
        const Image a = random_image(7, 6, 3, rng);
        Image b = a;
        for (double& v : b.data())
            v = 1.0 - v;
        CHECK(total_variation(a) == doctest::Approx(total_variation(b)).epsilon(1e-14));
    }
}

TEST_CASE("perceptual_loss")
{
    std::mt19937_64 rng(28);
    const FeatureStack a = {random_image(8, 8, 4, rng), random_image(4, 4, 6, rng)};
    const FeatureStack b = {random_image(8, 8, 4, rng), random_image(4, 4, 6, rng)};
    const OcclusionMap m = random_mask(8, 8, rng);
    CHECK(perceptual_loss(a, a, m, 10) == 0.0);

    // beta = 0 keeps only the masked term
    double manual = 0.0;
    for (std::size_t n = 0; n < 2; ++n) {
        const int s = a[n].height();
        double sum = 0.0;
        std::size_t cnt = 0;
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                const int sy = y * 8 / s, sx = x * 8 / s; // nearest, exact for 2x
                if (!m.at(sy + (8 / s) / 2, sx + (8 / s) / 2))
                    continue;
                ++cnt;
                for (int d = 0; d < a[n].channels(); ++d)
                    sum += std::abs(a[n].at(y, x, d) - b[n].at(y, x, d));
            }
        manual += cnt ? sum / (cnt * a[n].channels()) : 0.0;
    }
    CHECK(perceptual_loss(a, b, m, 0.0) == doctest::Approx(manual / 2).epsilon(1e-12));

    Image z(2, 2, 1);
    OcclusionMap m2(2, 2, 1);
    m2.set(1, 1, false);
    Image d_hole = z, d_valid = z;
    d_hole.at(1, 1) = 1;
    d_valid.at(0, 0) = 1;
    const double hole = perceptual_loss({d_hole}, {z}, m2, 10);
    const double valid = perceptual_loss({d_valid}, {z}, m2, 10);
    // per-term means: hole term averages over 1 pixel, valid term over 3
    CHECK(hole == doctest::Approx(10.0));
    CHECK(valid == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(perceptual_loss(a, {b[0]}, m, 1), ContractError);
    CHECK_THROWS_AS(perceptual_loss({}, {}, m, 1), InvalidArgument);
}

TEST_CASE("style_loss")
{
    std::mt19937_64 rng(29);
    const FeatureStack a = {random_image(6, 6, 3, rng)};
    const FeatureStack b = {random_image(6, 6, 3, rng)};
    const OcclusionMap ones(6, 6, 1);
    CHECK(style_loss(a, a, ones, 10) == 0.0);
    CHECK(style_loss(a, b, ones, 10) > 0.0);

    Image p(1, 1, 2), t(1, 1, 2);
    p.at(0, 0, 0) = 1.0;
    CHECK(style_loss({p}, {t}, OcclusionMap(1, 1, 1), 10) == 0.25);
    CHECK(style_loss({p}, {t}, OcclusionMap(1, 1, 0), 10) == 2.5);
}

TEST_CASE("masked_cross_entropy")
{
    const int h = 3, w = 4, k = 3;
    std::vector<int> labels(h * w);
    for (int i = 0; i < h * w; ++i)
        labels[i] = i % k;
    const LabelMap target = LabelMap::from_labels(h, w, k, labels);
    Image onehot(h, w, k);
    for (int i = 0; i < h * w; ++i)
        onehot.data()[i * k + labels[i]] = 1.0;
    std::mt19937_64 rng(30);
    const OcclusionMap m = random_mask(h, w, rng);
    CHECK(masked_cross_entropy(LabelMap::from_probs(onehot), target, m, 10) <= 1e-10);

    const LabelMap uni = LabelMap::from_probs(Image(h, w, k, 1.0 / 3.0));
    CHECK(masked_cross_entropy(uni, target, OcclusionMap(h, w, 1), 10) == doctest::Approx(std::log(3.0)));
    CHECK(masked_cross_entropy(uni, target, OcclusionMap(h, w, 1), 1e6) ==
          masked_cross_entropy(uni, target, OcclusionMap(h, w, 1), 0));

    // a wrong hard prediction hits the log clamp
    Image wrong(h, w, k);
    for (int i = 0; i < h * w; ++i)
        wrong.data()[i * k + (labels[i] + 1) % k] = 1.0;
    CHECK(masked_cross_entropy(LabelMap::from_probs(wrong), target, OcclusionMap(h, w, 1), 0) ==
          doctest::Approx(-std::log(1e-12)));

    Image bad(h, w, k, 0.5);
    CHECK_THROWS_AS(LabelMap::from_probs(bad), InvalidArgument);
    CHECK_THROWS_AS(LabelMap::from_labels(1, 1, 2, {2}), InvalidArgument);
}

TEST_CASE("objective combiners")
{
    LossConfig cfg;
    cfg.alpha = 0.0;
    // masked pixel term 1.0, smoothness term 2.0
    const Image pred = from_rows(1, 3, {1, 0, 0});
    const Image target(1, 3, 1);
    OcclusionMap m(1, 3, 0);
    m.set(0, 0, true);
    FlowField f(1, 3, FlowDirection::Backward);
    f.u(0, 1) = 3;
    f.u(0, 2) = 6;
    const Image img(1, 3, 1, 0.5);
    REQUIRE(masked_pixel_loss(pred, target, m, 0.0) == 1.0);
    REQUIRE(smoothness_loss(f, img) == 2.0);
    CHECK(flow_objective(pred, target, m, f, img, cfg) == doctest::Approx(1.2).epsilon(1e-15));
    cfg.lambda_smt = 0.0;
    CHECK(flow_objective(pred, target, m, f, img, cfg) == masked_pixel_loss(pred, target, m, 0.0));
    CHECK(flow_objective(target, target, m, FlowField(1, 3, FlowDirection::Backward, {1, 1}), img, LossConfig{}) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const LossConfig def;
    CHECK(inpaint_objective({1, 1, 1, 1, 1}, def) == doctest::Approx(126.15).epsilon(1e-14));
    CHECK(inpaint_objective({}, def) == 0.0);
    LossConfig zero = def;
    zero.lambda_prc = zero.lambda_sty = zero.lambda_var = zero.lambda_seg = 0.0;
    CHECK(inpaint_objective({0.7, 3, 4, 5, 6}, zero) == 0.7);

    std::mt19937_64 rng(31);
    const Image p = random_image(16, 16, 3, rng), q = random_image(16, 16, 3, rng);
    const OcclusionMap mm = random_mask(16, 16, rng);
    CHECK(pixel_reconstruction_loss(p, q, mm, def) ==
          masked_pixel_loss(p, q, mm, def.alpha) + def.beta * masked_pixel_loss(p, q, mm.inverted(), def.alpha));

    LossConfig bad;
    bad.lambda_sty = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("gradients vanish on flat inputs")
{
    const Image c(8, 8, 1, 0.4);
    const FlowField f(8, 8, FlowDirection::Backward, {0.3, -0.2});
    DiffInputs in;
    in.src = &c;
    in.dst = &c;
    in.flow = &f;
    in.image = &c;
    for (DiffTerm t : {DiffTerm::CharbonnierPhoto, DiffTerm::Smoothness, DiffTerm::TotalVariation})
        for (double g : loss_gradient(t, in).grad)
            CHECK(g == 0.0);
}

TEST_CASE("analytic gradients match central differences")
{
    // Trials are drawn away from the non-smooth spots: bilinear sample
    // positions keep their fraction in [0.05, 0.95], and residuals and
    // differences stay at least 0.01 from zero so the Charbonnier curvature
    // does not swamp the O(h^2) difference error.
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    constexpr int N = 8;
    constexpr double eps = kCharbonnierEps;
    int photo = 0, smooth = 0, tv = 0;
    double worst[3] = {0, 0, 0};

    while (photo < 100) {
        const Image src = random_image(N, N, 1, rng);
        FlowField f(N, N, FlowDirection::Backward);
        for (int y = 0; y < N; ++y)
            for (int x = 0; x < N; ++x) {
                const double ty = std::floor(U(rng) * (N - 1)) + 0.05 + 0.9 * U(rng);
                const double tx = std::floor(U(rng) * (N - 1)) + 0.05 + 0.9 * U(rng);
                f.set(y, x, {tx - x, ty - y});
            }
        Image dst = backward_warp(src, f);
        for (double& v : dst.data())
            v += (U(rng) < 0.5 ? -1 : 1) * (0.01 + 0.3 * U(rng));
        DiffInputs in;
        in.src = &src;
        in.dst = &dst;
        in.flow = &f;
        const DiffResult r = loss_gradient(DiffTerm::CharbonnierPhoto, in);
        CHECK(r.value == charbonnier_photometric(src, dst, f, eps, nullptr));
        FlowField g = f;
        const auto num = central_diff(g.data(), [&] { return charbonnier_photometric(src, dst, g, eps, nullptr); });
        worst[0] = std::max(worst[0], max_rel_err(r.grad, num));
        ++photo;
    }

    while (smooth < 100) {
        const Image img = random_image(N, N, 3, rng);
        const FlowField f = random_flow(N, N, FlowDirection::Backward, rng, 2.0);
        bool ok = true;
        for (int y = 0; y < N && ok; ++y)
            for (int x = 0; x < N && ok; ++x)
                for (int k = 0; k < 2; ++k) {
                    const double a = f.data()[2 * (y * N + x) + k];
                    if (x + 1 < N && std::abs(f.data()[2 * (y * N + x + 1) + k] - a) < 0.01)
                        ok = false;
                    if (y + 1 < N && std::abs(f.data()[2 * ((y + 1) * N + x) + k] - a) < 0.01)
                        ok = false;
                }
        if (!ok)
            continue;
        DiffInputs in;
        in.flow = &f;
        in.dst = &img;
        const DiffResult r = loss_gradient(DiffTerm::Smoothness, in);
        FlowField g = f;
        const auto num = central_diff(g.data(), [&] { return charbonnier_smoothness(g, img, eps, nullptr); });
        worst[1] = std::max(worst[1], max_rel_err(r.grad, num));
        ++smooth;
    }

    while (tv < 100) {
        const Image x = random_image(N, N, 1 + 2 * (tv % 2), rng);
        bool ok = true;
        for (int y = 0; y < N && ok; ++y)
            for (int xx = 0; xx < N && ok; ++xx) {
                if (y == N - 1 && xx == N - 1)
                    continue;
                double s = 0.0;
                for (int c = 0; c < x.channels(); ++c) {
                    const double dx = xx + 1 < N ? x.at(y, xx + 1, c) - x.at(y, xx, c) : 0.0;
                    const double dy = y + 1 < N ? x.at(y + 1, xx, c) - x.at(y, xx, c) : 0.0;
                    s += dx * dx + dy * dy;
                }
                ok = s >= 1e-4;
            }
        if (!ok)
            continue;
        DiffInputs in;
        in.image = &x;
        const DiffResult r = loss_gradient(DiffTerm::TotalVariation, in);
        Image g = x;
        const auto num = central_diff(g.data(), [&] { return charbonnier_tv(g, eps, nullptr); });
        worst[2] = std::max(worst[2], max_rel_err(r.grad, num));
        ++tv;
    }
    MESSAGE("worst relative errors: photo " << worst[0] << ", smooth " << worst[1] << ", tv " << worst[2]);
    CHECK(worst[0] < 1e-4);
    CHECK(worst[1] < 1e-4);
    CHECK(worst[2] < 1e-4);
}

TEST_CASE("TV gradient is odd")
{
    std::mt19937_64 rng(33);
    const Image x = random_image(8, 8, 3, rng);
    Image neg = x, inv = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        neg.data()[i] = -x.data()[i];
        inv.data()[i] = 1.0 - x.data()[i];
    }
    std::vector<double> g, gn, gi;
    charbonnier_tv(x, kCharbonnierEps, &g);
    charbonnier_tv(neg, kCharbonnierEps, &gn);
    charbonnier_tv(inv, kCharbonnierEps, &gi);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(gn[i] == -g[i]);
        CHECK(gi[i] == doctest::Approx(-g[i]).epsilon(1e-12));
    }
}

TEST_CASE("photometric term contract")
{
    const Image a(4, 4, 1);
    CHECK_THROWS_AS(charbonnier_photometric(a, a, FlowField(4, 4, FlowDirection::Forward), 1e-3, nullptr),
                    ContractError);
    CHECK_THROWS_AS(charbonnier_photometric(Image(4, 4, 3), Image(4, 4, 3), FlowField(4, 4, FlowDirection::Backward),
                                            1e-3, nullptr),
                    InvalidArgument);
}
