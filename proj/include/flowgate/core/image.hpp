#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flowgate/core/errors.hpp"

namespace flowgate {

/// Dense H×W×C grid of doubles, row-major with interleaved channels.
///
/// Frames are Images whose samples live in [0,1] with 1 or 3 channels; feature
/// maps and intermediate fields reuse the same container without those limits.
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, double fill = 0.0);

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    int channels() const noexcept { return c_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(h_) * w_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    double at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    std::size_t index(int y, int x, int c = 0) const noexcept
    {
        return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const Image& o) const noexcept
    {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }
    bool same_grid(const Image& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }

    /// Single channel `c` copied out as an H×W×1 image.
    Image channel(int c) const;
    /// Luma (0.299, 0.587, 0.114) for 3-channel input, a copy for 1-channel input.
    Image to_gray() const;
    void clamp01() noexcept;

    friend bool operator==(const Image&, const Image&) = default;

private:
    int h_ = 0;
    int w_ = 0;
    int c_ = 0;
    std::vector<double> data_;
};

using Frame = Image;

/// Throws InvalidArgument unless `f` has 1 or 3 channels and finite samples in [0,1].
void validate_frame(const Frame& f);

enum class FlowDirection : std::uint8_t {
    Forward,  // source grid -> target coordinates
    Backward, // target grid -> source coordinates
};

const char* to_string(FlowDirection d) noexcept;

struct FlowVec {
    double u = 0.0; // horizontal, +right
    double v = 0.0; // vertical, +down
};

/// Per-pixel displacement field in pixels, interleaved (u, v).
///
/// The direction tag is fixed at construction; consumers call require() to
/// check it. Use retagged() to obtain a copy that is interpreted differently,
/// e.g. a field estimated on grid A toward B is the forward flow A->B.
class FlowField {
public:
    FlowField() = default;
    FlowField(int height, int width, FlowDirection dir, FlowVec fill = {});

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(h_) * w_; }
    FlowDirection direction() const noexcept { return dir_; }

    double& u(int y, int x) noexcept { return data_[2 * idx(y, x)]; }
    double& v(int y, int x) noexcept { return data_[2 * idx(y, x) + 1]; }
    double u(int y, int x) const noexcept { return data_[2 * idx(y, x)]; }
    double v(int y, int x) const noexcept { return data_[2 * idx(y, x) + 1]; }
    FlowVec at(int y, int x) const noexcept { return {u(y, x), v(y, x)}; }
    void set(int y, int x, FlowVec f) noexcept
    {
        u(y, x) = f.u;
        v(y, x) = f.v;
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    void require(FlowDirection expected, const char* who) const;
    FlowField retagged(FlowDirection dir) const;
    bool same_grid(const FlowField& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }
    bool same_grid(const Image& o) const noexcept { return h_ == o.height() && w_ == o.width(); }
    bool all_finite() const noexcept;

    friend bool operator==(const FlowField&, const FlowField&) = default;

private:
    std::size_t idx(int y, int x) const noexcept { return static_cast<std::size_t>(y) * w_ + x; }

    int h_ = 0;
    int w_ = 0;
    FlowDirection dir_ = FlowDirection::Backward;
    std::vector<double> data_;
};

/// Accumulated splat density; non-negative.
class EnergyMap {
public:
    EnergyMap() = default;
    EnergyMap(int height, int width, double fill = 0.0)
        : h_(height), w_(width), data_(static_cast<std::size_t>(height) * width, fill)
    {
    }

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    double& at(int y, int x) noexcept { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    double at(int y, int x) const noexcept { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double sum() const noexcept;

    friend bool operator==(const EnergyMap&, const EnergyMap&) = default;

private:
    int h_ = 0;
    int w_ = 0;
    std::vector<double> data_;
};

/// Binary gate: 1 = motion-confident, 0 = occluded or disoccluded.
class OcclusionMap {
public:
    OcclusionMap() = default;
    OcclusionMap(int height, int width, std::uint8_t fill = 1);

    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    std::size_t pixel_count() const noexcept { return data_.size(); }
    std::uint8_t at(int y, int x) const noexcept { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    void set(int y, int x, bool valid) noexcept
    {
        data_[static_cast<std::size_t>(y) * w_ + x] = valid ? 1 : 0;
    }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    std::size_t count_valid() const noexcept;
    OcclusionMap inverted() const;
    bool same_grid(const Image& o) const noexcept { return h_ == o.height() && w_ == o.width(); }
    bool same_grid(const OcclusionMap& o) const noexcept { return h_ == o.h_ && w_ == o.w_; }

    friend bool operator==(const OcclusionMap&, const OcclusionMap&) = default;

private:
    int h_ = 0;
    int w_ = 0;
    std::vector<std::uint8_t> data_;
};

} // namespace flowgate
