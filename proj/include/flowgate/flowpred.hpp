#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowgate/core/clip.hpp"

namespace flowgate {

struct FlowSolverConfig {
    double alpha = 0.0;       // SSIM share of the photometric term; the solver supports 0 only
    double lambda_smt = 0.1;
    int min_side = 16;
    int iterations = 200;     // per pyramid level
    double step = 0.5;        // gradient fallback step, in pixels per unit of per-pixel gradient
    double charbonnier_eps = 1e-3;
    double tolerance = 1e-7;  // stop a level when the relative decrease falls below this

    void validate() const;
    bool operator==(const FlowSolverConfig&) const = default;
};

struct LevelTrace {
    int height = 0;
    int width = 0;
    std::vector<double> objective; // value after every accepted step, starting with the initial one
    int rejected = 0;
};

struct FlowEstimate {
    FlowField flow;
    std::vector<LevelTrace> levels; // coarsest first
};

/// Backward flow on the dst grid: dst(p) ~ src(p + f(p)). Minimizes the
/// Charbonnier photometric term plus lambda_smt times the Charbonnier
/// edge-aware smoothness, coarse to fine. Each step takes a reweighted
/// least-squares direction (SOR inner solve), falling back to the negative
/// gradient, and is accepted only if the objective strictly drops.
/// Colour input is converted to luma first.
FlowEstimate estimate_flow_traced(const Frame& src, const Frame& dst, const FlowSolverConfig& cfg = {});
FlowField estimate_flow(const Frame& src, const Frame& dst, const FlowSolverConfig& cfg = {});

enum class ExtrapolationMode : std::uint8_t { ZeroOrder, WarpCompose };

struct FlowPair {
    FlowField forward;  // t-1 -> t, on grid t-1
    FlowField backward; // t -> t-1, on grid t
};

/// Constant-velocity step from the forward flow t-2 -> t-1.
FlowPair extrapolate_flow(const FlowField& prev_forward, ExtrapolationMode mode = ExtrapolationMode::WarpCompose);

/// Splats -f to the target grid keeping, per pixel, the deposit whose sub-pixel
/// landing point is nearest (ties: larger motion, then row-major order), and
/// fills pixels without a deposit from the nearest filled pixel.
FlowField backward_from_forward(const FlowField& forward);

class FlowPredictor {
public:
    virtual ~FlowPredictor() = default;
    /// Flows for the step after the last frame of `history`.
    virtual FlowPair predict(const Clip& history) const = 0;
    virtual std::string name() const = 0;
};

class VariationalExtrapolator final : public FlowPredictor {
public:
    explicit VariationalExtrapolator(FlowSolverConfig cfg = {}, ExtrapolationMode mode = ExtrapolationMode::WarpCompose)
        : cfg_(cfg), mode_(mode)
    {
    }
    FlowPair predict(const Clip& history) const override;
    std::string name() const override { return "variational"; }

private:
    FlowSolverConfig cfg_;
    ExtrapolationMode mode_;
};

/// Returns the clip's ground truth for transition n-1 -> n verbatim.
class GroundTruthOracle final : public FlowPredictor {
public:
    FlowPair predict(const Clip& history) const override;
    std::string name() const override { return "oracle"; }
};

class ZeroFlow final : public FlowPredictor {
public:
    FlowPair predict(const Clip& history) const override;
    std::string name() const override { return "zero"; }
};

/// Checks the history length, then delegates to the predictor.
FlowPair predict_flows(const Clip& clip, const FlowPredictor& predictor);

} // namespace flowgate
