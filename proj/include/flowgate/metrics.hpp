#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/core/image.hpp"
#include "flowgate/losses.hpp"

namespace flowgate {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) for unit-range images; identical inputs give kPsnrCap.
double psnr(const Image& x, const Image& y);

struct EndpointError {
    double mean = 0.0;
    EnergyMap map; // per-pixel |f - g|
};

/// Mean over all pixels, or over mask-1 pixels when a mask is given (0 if none).
EndpointError endpoint_error(const FlowField& f, const FlowField& g, const OcclusionMap* mask = nullptr);

struct StepMetrics {
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> epe;
    std::optional<double> iou_occluded;
    std::optional<double> lpips; // reserved for external tools, never filled here

    bool operator==(const StepMetrics&) const = default;
};

struct Report {
    std::string clip_id;
    std::vector<StepMetrics> steps;
    nlohmann::json config_echo = nlohmann::json::object();

    /// Means over steps; optional fields average over the steps that carry them.
    StepMetrics means() const;
    bool operator==(const Report&) const = default;
};

struct PredictionAux {
    const FlowField* flow = nullptr;           // predicted
    const FlowField* gt_flow = nullptr;
    const OcclusionMap* mask = nullptr;        // predicted
    const OcclusionMap* gt_mask = nullptr;
};

StepMetrics evaluate_prediction(const Frame& pred, const Frame& gt, const PredictionAux& aux = {});

nlohmann::json to_json(const StepMetrics& m);
nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

} // namespace flowgate
