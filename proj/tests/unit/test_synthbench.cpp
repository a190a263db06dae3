#include <doctest.h>

#include "flowgate/synthbench.hpp"
#include "flowgate/warpcore.hpp"
#include "helpers.hpp"

using namespace flowgate;
using namespace fgtest;

TEST_CASE("prng test vectors")
{
    // computed with an independent Python transcription of the generator
    std::uint64_t st = 0;
    CHECK(synth::splitmix64(st) == 0xe220a8397b1dcdafULL);
    CHECK(synth::splitmix64(st) == 0x6e789e6aa1b965f4ULL);
    CHECK(synth::splitmix64(st) == 0x06c45d188009454fULL);

    synth::Rng r0(0);
    CHECK(r0.next_u64() == 0x7bbcb40d550682d0ULL);
    CHECK(r0.next_u64() == 0xde7fe413d00cc9fdULL);
    CHECK(r0.next_u64() == 0xb3c638353c668c91ULL);
    CHECK(r0.next_u64() == 0xe073afc0949195fcULL);

    synth::Rng r7(7);
    CHECK(r7.next_u64() == 0x14eaa7d1f828843aULL);
    CHECK(r7.next_u64() == 0x421d9d8fff2d1844ULL);
    CHECK(r7.next_u64() == 0x5aa548bbd8c601d5ULL);
    CHECK(r7.next_u64() == 0x8da9f11abe191404ULL);

    synth::Rng rd(0xDEADBEEF);
    CHECK(rd.next_u64() == 0xfed17e15c5a0394fULL);
    CHECK(rd.next_u64() == 0x74559d43d8c627bdULL);

    synth::Rng u(7);
    CHECK(u.uniform() == 0.08170555950360558);

    synth::Rng ui(99);
    for (int i = 0; i < 1000; ++i) {
        const int v = ui.uniform_int(-3, 5);
        CHECK(v >= -3);
        CHECK(v <= 5);
    }
}

TEST_CASE("value_noise range and determinism")
{
    const Image a = synth::value_noise(37, 29, 3, 5);
    CHECK(a == synth::value_noise(37, 29, 3, 5));
    CHECK_FALSE(a == synth::value_noise(37, 29, 3, 6));
    for (double v : a.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("static scene")
{
    synth::SceneSpec s;
    s.seed = 3;
    const auto lc = synth::generate_clip(s);
    REQUIRE(lc.clip.frames.size() == 3);
    CHECK(lc.clip.frames[0] == lc.clip.frames[1]);
    CHECK(lc.clip.frames[1] == lc.clip.frames[2]);
    for (const auto& f : lc.clip.gt_forward)
        for (double v : f.data())
            CHECK(v == 0.0);
    for (const auto& f : lc.clip.gt_backward)
        for (double v : f.data())
            CHECK(v == 0.0);
    for (const auto& m : lc.clip.gt_occlusion)
        CHECK(m.count_valid() == m.pixel_count());
    CHECK_NOTHROW(lc.clip.validate());
}

TEST_CASE("unit velocity gives one trailing and one leading column")
{
    synth::SceneSpec s;
    s.seed = 4;
    s.sprite_h = 20;
    s.sprite_w = 12;
    s.start_x = 40;
    s.start_y = 30;
    s.vel_u = 1;
    const auto lc = synth::generate_clip(s);
    const OcclusionMap& m = lc.clip.gt_occlusion[0];
    CHECK(m.pixel_count() - m.count_valid() == 2u * 20u);
    std::vector<double> energy;
    synth::oracle_occlusion(lc.clip.gt_forward[0], &energy);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            const bool rows = y >= 30 && y < 50;
            const double e = energy[static_cast<std::size_t>(y) * 128 + x];
            if (rows && x == 40) { // trailing edge: uncovered background
                CHECK(e == 0.0);
                CHECK(m.at(y, x) == 0);
            } else if (rows && x == 52) { // leading edge: sprite lands on background
                CHECK(e == 2.0);
                CHECK(m.at(y, x) == 0);
            } else {
                CHECK(m.at(y, x) == 1);
            }
        }
}

TEST_CASE("generation is deterministic")
{
    synth::SceneSpec s;
    s.seed = 11;
    s.vel_u = 2.5;
    s.vel_v = -1.25;
    s.num_frames = 4;
    const auto a = synth::generate_clip(s), b = synth::generate_clip(s);
    CHECK(a.clip.frames == b.clip.frames);
    CHECK(a.clip.gt_forward == b.clip.gt_forward);
    CHECK(a.clip.gt_backward == b.clip.gt_backward);
    CHECK(a.clip.gt_occlusion == b.clip.gt_occlusion);
    CHECK(a.foreground == b.foreground);
}

TEST_CASE("scene validation")
{
    synth::SceneSpec s;
    s.num_frames = 2;
    CHECK_THROWS_AS(synth::generate_clip(s), InvalidArgument);
    s.num_frames = 3;
    s.start_x = 120;
    s.vel_u = 5;
    CHECK_THROWS_AS(synth::generate_clip(s), InvalidArgument);
    s.allow_clipping = true;
    CHECK_NOTHROW(synth::generate_clip(s));
}

TEST_CASE("iou")
{
    OcclusionMap a(2, 4, 1), b(2, 4, 1);
    CHECK(synth::iou(a, b) == 1.0);
    a.set(0, 0, false);
    b.set(1, 3, false);
    CHECK(synth::iou(a, b) == 0.0);
    OcclusionMap c(2, 4, 1), d(2, 4, 1);
    for (int x = 0; x < 4; ++x)
        c.set(0, x, false);
    d.set(0, 0, false);
    d.set(0, 1, false);
    d.set(1, 0, false);
    d.set(1, 1, false);
    CHECK(synth::iou(c, d) == doctest::Approx(1.0 / 3.0));
    CHECK(synth::iou(c, d, synth::PositiveClass::Valid) == doctest::Approx(2.0 / 6.0));
    CHECK_THROWS_AS(synth::iou(a, OcclusionMap(2, 3)), ContractError);
}

TEST_CASE("suite generation")
{
    CHECK(synth::generate_suite(0, 1).empty());
    const auto a = synth::generate_suite(30, 7), b = synth::generate_suite(30, 7);
    CHECK(a == b);
    const auto prefix = synth::generate_suite(10, 7);
    CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));
    for (const auto& s : a) {
        CHECK(std::abs(s.vel_u) <= 5.0);
        CHECK(std::abs(s.vel_v) <= 5.0);
        CHECK(s.vel_u == std::floor(s.vel_u));
        CHECK(s.sprite_w >= 16);
        CHECK(s.sprite_h <= 64);
        CHECK_NOTHROW(s.validate());
    }
    synth::SuiteParams p;
    p.integer_velocity = false;
    p.min_speed = 2.0;
    for (const auto& s : synth::generate_suite(30, 8, p))
        CHECK(std::hypot(s.vel_u, s.vel_v) >= 2.0);
    const auto filtered = synth::generate_filtered_suite(5, 9, {}, 0.02);
    REQUIRE(filtered.size() == 5);
    for (const auto& c : filtered)
        CHECK(synth::occluded_fraction(c) >= 0.02);
}

TEST_CASE("ground-truth flows reproduce the next frame at valid pixels")
{
    for (bool integer : {true, false}) {
        synth::SuiteParams p;
        p.integer_velocity = integer;
        p.num_frames = 4;
        double worst = 0.0, worst_inner = 0.0;
        for (const auto& s : synth::generate_suite(10, 12, p)) {
            const auto lc = synth::generate_clip(s);
            for (std::size_t k = 0; k + 1 < lc.clip.frames.size(); ++k) {
                const Frame w = backward_warp(lc.clip.frames[k], lc.clip.gt_backward[k]);
                const Frame& nxt = lc.clip.frames[k + 1];
                const OcclusionMap& m = lc.clip.gt_occlusion[k];
                const auto& fg = lc.foreground[k + 1];
                const auto& fg0 = lc.foreground[k];
                const int W = nxt.width(), H = nxt.height();
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) {
                        if (!m.at(y, x))
                            continue;
                        // a pixel straddling the sprite outline mixes two surfaces
                        bool edge = false;
                        for (int dy = -2; dy <= 2; ++dy)
                            for (int dx = -2; dx <= 2; ++dx) {
                                const int yy = std::clamp(y + dy, 0, H - 1), xx = std::clamp(x + dx, 0, W - 1);
                                edge |= fg[yy * W + xx] != fg[y * W + x] || fg0[yy * W + xx] != fg0[y * W + x];
                            }
                        for (int c = 0; c < nxt.channels(); ++c) {
                            const double e = std::abs(w.at(y, x, c) - nxt.at(y, x, c));
                            worst = std::max(worst, e);
                            if (!edge)
                                worst_inner = std::max(worst_inner, e);
                        }
                    }
            }
        }
        MESSAGE(std::string(integer ? "integer" : "fractional") << " velocities: max error " << worst << ", away from edges " << worst_inner);
        // Integer motion has no blended outline pixels, so the bound holds everywhere.
        // Sub-pixel motion blends sprite and background along the outline and no single
        // flow vector reproduces such a pixel; there the bound is checked off the outline.
        if (integer)
            CHECK(worst < 0.02);
        CHECK(worst_inner < 0.02);
    }
}

TEST_CASE("oracle energy conserves mass for interior sprites")
{
    synth::SuiteParams p;
    p.integer_velocity = false;
    for (const auto& s : synth::generate_suite(10, 13, p)) {
        const auto lc = synth::generate_clip(s);
        std::vector<double> e;
        synth::oracle_occlusion(lc.clip.gt_forward[0], &e);
        double sum = 0.0;
        for (double v : e)
            sum += v;
        CHECK(std::abs(sum - 128.0 * 128.0) < 1e-4);
    }
}
