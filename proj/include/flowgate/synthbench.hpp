#pragma once

#include <cstdint>
#include <vector>

#include "flowgate/core/clip.hpp"

namespace flowgate::synth {

/// splitmix64 step; used to expand seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D), state
/// initialised from splitmix64(seed) and never zero.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;
    /// 53-bit uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi], via floor of uniform().
    int uniform_int(int lo, int hi) noexcept;

private:
    std::uint64_t s_;
};

/// Smooth multi-octave value noise in [0, 1]: lattice values on grids with
/// cell sizes 16, 8 and 4 px, smoothstep interpolation, amplitudes 4:2:1.
Image value_noise(int h, int w, int channels, std::uint64_t seed);

struct SceneSpec {
    std::uint64_t seed = 0;
    int canvas_h = 128;
    int canvas_w = 128;
    int channels = 3;
    int sprite_h = 32;
    int sprite_w = 32;
    double start_x = 48.0; // sprite top-left at frame 0
    double start_y = 48.0;
    double vel_u = 0.0;    // px / frame
    double vel_v = 0.0;
    int num_frames = 3;
    bool allow_clipping = false;

    void validate() const;
    bool operator==(const SceneSpec&) const = default;
};

struct LabeledClip {
    SceneSpec spec;
    Clip clip;
    std::vector<std::vector<std::uint8_t>> foreground; // per frame, 1 where sprite alpha >= 0.5
};

/// Renders the scene and its ground truth. Sprite placement is bilinear;
/// a pixel belongs to the sprite when its coverage is at least 0.5.
LabeledClip generate_clip(const SceneSpec& spec);

/// Energy of a forward flow by direct splatting, thresholded with the
/// default (0, 2, 1e-6) rule. Independent of the warpcore implementation.
OcclusionMap oracle_occlusion(const FlowField& forward, std::vector<double>* energy = nullptr);

enum class PositiveClass : std::uint8_t { Occluded, Valid };

/// |A n B| / |A u B| over the chosen class; 1 when both sets are empty.
double iou(const OcclusionMap& a, const OcclusionMap& b, PositiveClass cls = PositiveClass::Occluded);

struct SuiteParams {
    int canvas = 128;
    int channels = 3;
    int sprite_min = 16;
    int sprite_max = 64;
    double max_speed = 5.0; // bound on |u| and |v|
    double min_speed = 0.0; // lower bound on the Euclidean speed
    bool integer_velocity = true;
    int num_frames = 3;
};

/// Deterministic specs; integer-velocity suites also use integer start positions.
std::vector<SceneSpec> generate_suite(int n, std::uint64_t seed, const SuiteParams& params = {});

/// Fraction of mask-0 pixels in the occlusion map of the last transition.
double occluded_fraction(const LabeledClip& clip);

/// First n rendered clips of the seeded spec stream whose occluded fraction is
/// at least min_occluded. Gives up (InvalidArgument) after 50n + 100 candidates.
std::vector<LabeledClip> generate_filtered_suite(int n, std::uint64_t seed, const SuiteParams& params,
                                                 double min_occluded);

} // namespace flowgate::synth
