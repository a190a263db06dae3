#include <doctest.h>

#include "flowgate/viz.hpp"

using namespace flowgate;

TEST_CASE("colour wheel anchors")
{
    // zero vector is white, unit vectors hit the wheel at full saturation
    const auto w = viz::wheel_color(0, 0);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 1.0);
    CHECK(w[2] == 1.0);
    // +u (rightward) sits at hue index 0: pure red
    const auto right = viz::wheel_color(1, 0);
    CHECK(right[0] == doctest::Approx(1.0));
    CHECK(right[1] == doctest::Approx(0.0));
    CHECK(right[2] == doctest::Approx(0.0));
    // -u lands halfway round the wheel, past green into cyan-blue
    const auto left = viz::wheel_color(-1, 0);
    CHECK(left[0] == doctest::Approx(0.0));
    CHECK(left[2] == doctest::Approx(1.0));
    // beyond the unit circle the colour is dimmed
    const auto far = viz::wheel_color(2, 0);
    CHECK(far[0] == doctest::Approx(0.75));
    CHECK(far[1] == doctest::Approx(0.0));
}

TEST_CASE("flow_to_color normalizes by the largest vector")
{
    FlowField f(1, 2, FlowDirection::Forward);
    f.set(0, 1, {4, 0});
    const Frame img = viz::flow_to_color(f);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(0, 1, 0) == doctest::Approx(1.0));
    CHECK(img.at(0, 1, 1) == doctest::Approx(0.0));
    for (double v : img.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("mask overlay tints holes only")
{
    Frame g(1, 2, 1, 0.2);
    OcclusionMap m(1, 2, 1);
    m.set(0, 1, false);
    const Frame o = viz::overlay_mask(g, m);
    REQUIRE(o.channels() == 3);
    CHECK(o.at(0, 0, 0) == 0.2);
    CHECK(o.at(0, 0, 2) == 0.2);
    CHECK(o.at(0, 1, 0) == doctest::Approx(0.6));
    CHECK(o.at(0, 1, 1) == doctest::Approx(0.6));
    CHECK(o.at(0, 1, 2) == doctest::Approx(0.1));
}
