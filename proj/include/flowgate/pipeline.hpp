#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/core/clip.hpp"
#include "flowgate/flowpred.hpp"
#include "flowgate/losses.hpp"
#include "flowgate/metrics.hpp"
#include "flowgate/simd/kernels.hpp"
#include "flowgate/synthbench.hpp"

namespace flowgate {

enum class PredictorKind : std::uint8_t { Variational, Oracle, Zero };

enum class MaskSource : std::uint8_t {
    Computed,  // energy-based map from the predicted forward flow
    AllOnes,   // warp-only baseline
    Oracle,    // clip ground truth
    BlendStub, // "no occlusion map": mask 0 everywhere, generator = 50/50 warp and its blurred copy
};

enum class InpainterKind : std::uint8_t { PullPush, None };

struct PipelineConfig {
    PredictorKind predictor = PredictorKind::Variational;
    ExtrapolationMode extrapolation = ExtrapolationMode::WarpCompose;
    FlowSolverConfig solver{};
    LossConfig loss{};
    InpainterKind inpainter = InpainterKind::PullPush;
    MaskSource mask = MaskSource::Computed;
    BorderMode border = BorderMode::Clamp;

    void validate() const;
    bool operator==(const PipelineConfig&) const = default;
};

struct Prediction {
    Frame final;
    Frame warped;
    FlowField flow_fwd;
    FlowField flow_bwd;
    EnergyMap energy;
    OcclusionMap mask;
    Frame inpainted;
};

std::unique_ptr<FlowPredictor> make_predictor(const PipelineConfig& cfg);

/// One step past the last frame of `clip`.
Prediction predict_next(const Clip& clip, const PipelineConfig& cfg);

/// The stages after flow prediction, for callers that already hold the flows.
Prediction predict_from_flows(const Clip& clip, const FlowPair& flows, const PipelineConfig& cfg);

/// Recursive prediction: each final frame joins the history and flows are
/// re-estimated from the augmented history.
std::vector<Prediction> predict_multi(const Clip& clip, int horizon, const PipelineConfig& cfg);

struct AblationVariant {
    std::string name;
    PipelineConfig cfg;
};

/// warp-only, no-occlusion-map stub and computed-mask variants on top of `base`.
std::vector<AblationVariant> default_variants(const PipelineConfig& base);

struct NamedSuite {
    std::string name;
    std::vector<synth::LabeledClip> clips;
};

struct AblationRow {
    std::string suite;
    std::string variant;
    int clips = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double iou_occluded = 0.0;
};

/// Each clip predicts its last frame from the preceding ones. Rows are
/// ordered suite-major. `jobs` > 1 spreads clips over threads; results do not
/// depend on it.
std::vector<AblationRow> run_ablation(const std::vector<NamedSuite>& suites,
                                      const std::vector<AblationVariant>& variants, int jobs = 1);

std::string ablation_csv(const std::vector<AblationRow>& rows);
nlohmann::json ablation_json(const std::vector<AblationRow>& rows);

// Config serialization. Every field is written, so to_json(PipelineConfig{})
// is the full list of defaults.
nlohmann::json to_json(const FlowSolverConfig& c);
nlohmann::json to_json(const LossConfig& c);
nlohmann::json to_json(const PipelineConfig& c);
/// Missing keys keep their defaults; unknown keys and bad values throw InvalidArgument.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

} // namespace flowgate
