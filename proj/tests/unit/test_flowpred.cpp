#include <doctest.h>

#include <random>

#include "flowgate/flowpred.hpp"
#include "flowgate/metrics.hpp"
#include "flowgate/synthbench.hpp"
#include "flowgate/warpcore.hpp"
#include "helpers.hpp"

using namespace flowgate;
using namespace fgtest;

namespace {

Image crop(const Image& img, int y0, int x0, int h, int w)
{
    Image out(h, w, img.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels(); ++c)
                out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

void check_monotone(const FlowEstimate& est)
{
    for (const LevelTrace& t : est.levels) {
        REQUIRE(!t.objective.empty());
        for (std::size_t i = 1; i < t.objective.size(); ++i)
            CHECK(t.objective[i] <= t.objective[i - 1]);
    }
}

double interior_epe(const FlowField& f, double u, double v, int border)
{
    double s = 0.0;
    int n = 0;
    for (int y = border; y < f.height() - border; ++y)
        for (int x = border; x < f.width() - border; ++x) {
            s += std::hypot(f.u(y, x) - u, f.v(y, x) - v);
            ++n;
        }
    return s / n;
}

} // namespace

TEST_CASE("identical frames give near-zero flow")
{
    const Image tex = synth::value_noise(64, 64, 1, 1);
    const FlowEstimate est = estimate_flow_traced(tex, tex);
    CHECK(est.flow.direction() == FlowDirection::Backward);
    CHECK(endpoint_error(est.flow, FlowField(64, 64, FlowDirection::Backward)).mean <= 0.05);
    check_monotone(est);
    CHECK(est.levels.size() == 3);
    CHECK(est.levels.front().height == 16);
}

TEST_CASE("global translation is recovered")
{
    const Image tex = synth::value_noise(64, 64, 3, 2);
    const Image dst = backward_warp(tex, FlowField(64, 64, FlowDirection::Backward, {3.0, 0.0}));
    const FlowEstimate est = estimate_flow_traced(tex, dst);
    const double epe = endpoint_error(est.flow, FlowField(64, 64, FlowDirection::Backward, {3.0, 0.0})).mean;
    MESSAGE("translation (3,0) EPE " << epe);
    CHECK(epe <= 0.5);
    check_monotone(est);
}

TEST_CASE("textureless input stays near zero")
{
    const Image c(48, 48, 1, 0.5);
    const FlowField f = estimate_flow(c, c);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            CHECK(std::hypot(f.u(y, x), f.v(y, x)) <= 0.1);
    // a brightness change carries no motion either
    const FlowField g = estimate_flow(c, Image(48, 48, 1, 0.6));
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            CHECK(std::hypot(g.u(y, x), g.v(y, x)) <= 0.1);
}

TEST_CASE("integer shift of both inputs barely changes the estimate")
{
    const Image big = synth::value_noise(96, 96, 1, 3);
    const double u = 2.0, v = -1.0;
    // dst(p) = big(p + (u, v)): crop the big texture at an offset
    const Image src1 = crop(big, 8, 8, 64, 64), dst1 = crop(big, 8 + static_cast<int>(v), 8 + static_cast<int>(u), 64, 64);
    const Image src2 = crop(big, 13, 11, 64, 64), dst2 = crop(big, 13 + static_cast<int>(v), 11 + static_cast<int>(u), 64, 64);
    const double e1 = interior_epe(estimate_flow(src1, dst1), u, v, 8);
    const double e2 = interior_epe(estimate_flow(src2, dst2), u, v, 8);
    MESSAGE("interior EPE " << e1 << " vs " << e2);
    CHECK(std::abs(e1 - e2) < 0.1);
}

TEST_CASE("solver errors and config validation")
{
    Image bad(32, 32, 1, 0.5);
    bad.at(3, 3) = std::nan("");
    CHECK_THROWS(estimate_flow(bad, Image(32, 32, 1, 0.5)));
    CHECK_THROWS_AS(estimate_flow(Image(8, 8, 1), Image(8, 9, 1)), ContractError);
    FlowSolverConfig c;
    c.alpha = 0.9;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.lambda_smt = -1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.min_side = 2;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("extrapolation fixed points")
{
    for (ExtrapolationMode mode : {ExtrapolationMode::ZeroOrder, ExtrapolationMode::WarpCompose}) {
        const FlowPair p = extrapolate_flow(FlowField(12, 10, FlowDirection::Forward, {2, 0}), mode);
        CHECK(p.forward.direction() == FlowDirection::Forward);
        CHECK(p.backward.direction() == FlowDirection::Backward);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 10; ++x) {
                CHECK(p.forward.u(y, x) == 2.0);
                CHECK(p.forward.v(y, x) == 0.0);
                CHECK(p.backward.u(y, x) == -2.0);
                CHECK(p.backward.v(y, x) == 0.0);
            }
        const FlowPair z = extrapolate_flow(FlowField(5, 5, FlowDirection::Forward), mode);
        for (double v : z.forward.data())
            CHECK(v == 0.0);
        for (double v : z.backward.data())
            CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(extrapolate_flow(FlowField(3, 3, FlowDirection::Backward)), ContractError);
}

TEST_CASE("uniform fields survive both extrapolation rules")
{
    std::mt19937_64 rng(60);
    std::uniform_real_distribution<double> d(-4, 4);
    for (int t = 0; t < 10; ++t) {
        const FlowVec fv{d(rng), d(rng)};
        for (ExtrapolationMode mode : {ExtrapolationMode::ZeroOrder, ExtrapolationMode::WarpCompose}) {
            const FlowPair p = extrapolate_flow(FlowField(16, 16, FlowDirection::Forward, fv), mode);
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x) {
                    CHECK(p.forward.u(y, x) == fv.u);
                    CHECK(p.backward.u(y, x) == -fv.u);
                    CHECK(p.backward.v(y, x) == -fv.v);
                }
        }
    }
}

TEST_CASE("backward_from_forward keeps the nearest deposit and fills holes")
{
    // two sources land on pixel 2: the exact hit wins over the half-pixel one
    FlowField f(1, 4, FlowDirection::Forward);
    f.set(0, 0, {2.0, 0});
    f.set(0, 1, {1.5, 0});
    const FlowField b = backward_from_forward(f);
    CHECK(b.direction() == FlowDirection::Backward);
    CHECK(b.u(0, 2) == -2.0);
    // pixel 0 receives nothing and copies its nearest filled neighbour
    CHECK(b.u(0, 0) == b.u(0, 1));
}

TEST_CASE("predictors")
{
    synth::SceneSpec s;
    s.seed = 17;
    s.vel_u = 3;
    s.vel_v = 1;
    s.num_frames = 3;
    const auto lc = synth::generate_clip(s);
    const Clip hist = lc.clip.history(2);

    const FlowPair o = predict_flows(hist, GroundTruthOracle{});
    CHECK(o.forward == lc.clip.gt_forward[1]);
    CHECK(o.backward == lc.clip.gt_backward[1]);

    const FlowPair z = predict_flows(hist, ZeroFlow{});
    CHECK(backward_warp(hist.frames.back(), z.backward) == hist.frames.back());

    const FlowPair v = predict_flows(hist, VariationalExtrapolator{});
    const double epe = endpoint_error(v.forward, lc.clip.gt_forward[1]).mean;
    MESSAGE("variational next-step forward EPE " << epe);
    CHECK(epe <= 1.0);

    CHECK_THROWS_AS(predict_flows(lc.clip.history(1), ZeroFlow{}), InvalidArgument);
    Clip no_gt = hist;
    no_gt.gt_forward.clear();
    no_gt.gt_backward.clear();
    CHECK_THROWS_AS(predict_flows(no_gt, GroundTruthOracle{}), InvalidArgument);
}
