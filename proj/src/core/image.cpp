#include "flowgate/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flowgate {

Image::Image(int height, int width, int channels, double fill)
    : h_(height), w_(width), c_(channels)
{
    if (height < 0 || width < 0 || channels < 1)
        throw InvalidArgument("Image: negative dimensions or zero channels");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image Image::channel(int c) const
{
    Image out(h_, w_, 1);
    for (std::size_t p = 0; p < pixel_count(); ++p)
        out.data_[p] = data_[p * c_ + c];
    return out;
}

Image Image::to_gray() const
{
    if (c_ == 1)
        return *this;
    if (c_ != 3)
        throw InvalidArgument("to_gray: expected 1 or 3 channels");
    Image out(h_, w_, 1);
    for (std::size_t p = 0; p < pixel_count(); ++p) {
        const double* s = &data_[p * 3];
        out.data_[p] = 0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2];
    }
    return out;
}

void Image::clamp01() noexcept
{
    for (double& v : data_)
        v = std::clamp(v, 0.0, 1.0);
}

void validate_frame(const Frame& f)
{
    if (f.channels() != 1 && f.channels() != 3)
        throw InvalidArgument("frame must have 1 or 3 channels, got " + std::to_string(f.channels()));
    for (double v : f.data())
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw InvalidArgument("frame sample outside [0,1]");
}

const char* to_string(FlowDirection d) noexcept
{
    return d == FlowDirection::Forward ? "forward" : "backward";
}

FlowField::FlowField(int height, int width, FlowDirection dir, FlowVec fill)
    : h_(height), w_(width), dir_(dir)
{
    if (height < 0 || width < 0)
        throw InvalidArgument("FlowField: negative dimensions");
    data_.resize(2 * static_cast<std::size_t>(height) * width);
    for (std::size_t i = 0; i < data_.size(); i += 2) {
        data_[i] = fill.u;
        data_[i + 1] = fill.v;
    }
}

void FlowField::require(FlowDirection expected, const char* who) const
{
    if (dir_ != expected)
        throw ContractError(std::string(who) + ": expected " + to_string(expected) + " flow, got "
                            + to_string(dir_));
}

FlowField FlowField::retagged(FlowDirection dir) const
{
    FlowField out = *this;
    out.dir_ = dir;
    return out;
}

bool FlowField::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double EnergyMap::sum() const noexcept
{
    double s = 0.0;
    for (double v : data_)
        s += v;
    return s;
}

OcclusionMap::OcclusionMap(int height, int width, std::uint8_t fill)
    : h_(height), w_(width)
{
    if (height < 0 || width < 0)
        throw InvalidArgument("OcclusionMap: negative dimensions");
    data_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t OcclusionMap::count_valid() const noexcept
{
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

OcclusionMap OcclusionMap::inverted() const
{
    OcclusionMap out = *this;
    for (auto& v : out.data_)
        v = v ? 0 : 1;
    return out;
}

} // namespace flowgate
