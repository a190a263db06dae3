#pragma once

#include <cmath>
#include <random>

#include "flowgate/core/image.hpp"

namespace fgtest {

using namespace flowgate;

inline Image random_image(int h, int w, int c, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Image img(h, w, c);
    for (double& v : img.data())
        v = d(rng);
    return img;
}

inline FlowField random_flow(int h, int w, FlowDirection dir, std::mt19937_64& rng, double mag)
{
    std::uniform_real_distribution<double> d(-mag, mag);
    FlowField f(h, w, dir);
    for (double& v : f.data())
        v = d(rng);
    return f;
}

inline OcclusionMap random_mask(int h, int w, std::mt19937_64& rng, double p_valid = 0.5)
{
    std::bernoulli_distribution d(p_valid);
    OcclusionMap m(h, w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.set(y, x, d(rng));
    return m;
}

inline Image from_rows(int h, int w, std::initializer_list<double> vals)
{
    Image img(h, w, 1);
    auto it = vals.begin();
    for (double& v : img.data())
        v = *it++;
    return img;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace fgtest
