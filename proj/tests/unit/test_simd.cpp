#include <doctest.h>

#include <cstdlib>
#include <random>
#include <string_view>
#include <vector>

#include "flowgate/simd/kernels.hpp"
#include "helpers.hpp"

using namespace flowgate;
using namespace fgtest;

namespace {

struct Tables {
    const simd::KernelTable* scalar = simd::table_for(simd::Isa::Scalar);
    const simd::KernelTable* vec = simd::table_for(simd::Isa::Avx2);
};

std::vector<double> rnd(std::size_t n, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v)
        x = d(rng);
    return v;
}

} // namespace

TEST_CASE("scalar table always available")
{
    REQUIRE(simd::table_for(simd::Isa::Scalar) != nullptr);
    CHECK(simd::supported(simd::Isa::Scalar));
    const simd::Isa before = simd::active().isa;
    {
        simd::ScopedIsa s(simd::Isa::Scalar);
        CHECK(simd::active().isa == simd::Isa::Scalar);
    }
    CHECK(simd::active().isa == before);
    // FLOWGATE_ISA=scalar pins the default; otherwise the best set is picked
    const char* env = std::getenv("FLOWGATE_ISA");
    if (env && std::string_view(env) == "scalar")
        CHECK(before == simd::Isa::Scalar);
    else if (!env)
        CHECK(before == simd::best_supported());
}

TEST_CASE("vector kernels match scalar reference")
{
    Tables t;
    if (!t.vec) {
        MESSAGE("AVX2 not available on this machine; equivalence not exercised");
        return;
    }
    std::mt19937_64 rng(11);
    // odd widths exercise the remainder lanes
    for (int trial = 0; trial < 30; ++trial) {
        const int h = 1 + trial % 7, w = 1 + (trial * 5) % 17, c = trial % 2 ? 3 : 1;
        const std::size_t n = static_cast<std::size_t>(h) * w;
        const auto src = rnd(n * c, rng, 0.0, 1.0);
        const auto flow = rnd(n * 2, rng, -3.0, 3.0);
        for (BorderMode b : {BorderMode::Clamp, BorderMode::Zero}) {
            std::vector<double> a(n * c), v(n * c);
            t.scalar->warp_bilinear(src.data(), h, w, c, flow.data(), b, a.data());
            t.vec->warp_bilinear(src.data(), h, w, c, flow.data(), b, v.data());
            CHECK(a == v);
        }
        {
            const auto s1 = rnd(n, rng, 0.0, 1.0);
            std::vector<double> a(n), ax(n), ay(n), v(n), vx(n), vy(n);
            t.scalar->warp_bilinear_grad(s1.data(), h, w, flow.data(), a.data(), ax.data(), ay.data());
            t.vec->warp_bilinear_grad(s1.data(), h, w, flow.data(), v.data(), vx.data(), vy.data());
            CHECK(a == v);
            CHECK(ax == vx);
            CHECK(ay == vy);
        }
        const auto other = rnd(n * c, rng, 0.0, 1.0);
        std::vector<std::uint8_t> mask(n);
        for (auto& m : mask)
            m = static_cast<std::uint8_t>(rng() & 1);
        {
            std::vector<double> a(n * c), v(n * c);
            t.scalar->blend(src.data(), other.data(), mask.data(), n, c, a.data());
            t.vec->blend(src.data(), other.data(), mask.data(), n, c, v.data());
            CHECK(a == v);
        }
        const double ss = t.scalar->sum_sq_diff(src.data(), other.data(), n * c);
        CHECK(t.vec->sum_sq_diff(src.data(), other.data(), n * c) == doctest::Approx(ss).epsilon(1e-12));
        const double ma = t.scalar->masked_abs_diff(src.data(), other.data(), mask.data(), n, c);
        CHECK(t.vec->masked_abs_diff(src.data(), other.data(), mask.data(), n, c) ==
              doctest::Approx(ma).epsilon(1e-12));
        {
            const auto r = rnd(n * c, rng, -1.0, 1.0);
            std::vector<double> da(n * c), dv(n * c);
            const double ca = t.scalar->charbonnier(r.data(), n * c, 1e-3, da.data());
            const double cv = t.vec->charbonnier(r.data(), n * c, 1e-3, dv.data());
            CHECK(cv == doctest::Approx(ca).epsilon(1e-12));
            CHECK(da == dv);
            CHECK(t.vec->charbonnier(r.data(), n * c, 1e-3, nullptr) == doctest::Approx(ca).epsilon(1e-12));
        }
        for (int taps = 1; taps <= std::min(w, 11); taps += 2) {
            const auto k = rnd(taps, rng, 0.0, 1.0);
            const auto plane = rnd(n, rng, 0.0, 1.0);
            std::vector<double> a(static_cast<std::size_t>(h) * (w - taps + 1)), v(a.size());
            t.scalar->filter_rows(plane.data(), h, w, k.data(), taps, a.data());
            t.vec->filter_rows(plane.data(), h, w, k.data(), taps, v.data());
            CHECK(a == v);
        }
        for (int taps = 1; taps <= std::min(h, 11); taps += 2) {
            const auto k = rnd(taps, rng, 0.0, 1.0);
            const auto plane = rnd(n, rng, 0.0, 1.0);
            std::vector<double> a(static_cast<std::size_t>(h - taps + 1) * w), v(a.size());
            t.scalar->filter_cols(plane.data(), h, w, k.data(), taps, a.data());
            t.vec->filter_cols(plane.data(), h, w, k.data(), taps, v.data());
            CHECK(a == v);
        }
    }
}

TEST_CASE("select rejects unsupported isa")
{
    if (!simd::supported(simd::Isa::Avx2))
        CHECK_THROWS_AS(simd::select(simd::Isa::Avx2), InvalidArgument);
    else
        CHECK_NOTHROW(simd::ScopedIsa(simd::Isa::Avx2));
}
