#include <array>
#include <string>
#include <utility>

#include "flowgate/pipeline.hpp"

namespace flowgate {

namespace {

using nlohmann::json;

template <typename E, std::size_t N>
using Names = std::array<std::pair<E, const char*>, N>;

constexpr Names<PredictorKind, 3> kPredictors{{
    {PredictorKind::Variational, "variational"},
    {PredictorKind::Oracle, "oracle"},
    {PredictorKind::Zero, "zero"},
}};
constexpr Names<ExtrapolationMode, 2> kExtrap{{
    {ExtrapolationMode::ZeroOrder, "zero_order"},
    {ExtrapolationMode::WarpCompose, "warp_compose"},
}};
constexpr Names<InpainterKind, 2> kInpainters{{
    {InpainterKind::PullPush, "pullpush"},
    {InpainterKind::None, "none"},
}};
constexpr Names<MaskSource, 4> kMasks{{
    {MaskSource::Computed, "computed"},
    {MaskSource::AllOnes, "all_ones"},
    {MaskSource::Oracle, "oracle"},
    {MaskSource::BlendStub, "blend_stub"},
}};
constexpr Names<BorderMode, 2> kBorders{{
    {BorderMode::Clamp, "clamp"},
    {BorderMode::Zero, "zero"},
}};
constexpr Names<Normalization, 2> kNorms{{
    {Normalization::MeanOverValid, "mean_over_valid"},
    {Normalization::Sum, "sum"},
}};

template <typename E, std::size_t N>
const char* name_of(const Names<E, N>& names, E v)
{
    for (const auto& [e, s] : names)
        if (e == v)
            return s;
    return "?";
}

template <typename E, std::size_t N>
E parse_enum(const Names<E, N>& names, const json& j, const char* key)
{
    if (!j.is_string())
        throw InvalidArgument(std::string("config: ") + key + " must be a string");
    const auto s = j.get<std::string>();
    for (const auto& [e, n] : names)
        if (s == n)
            return e;
    throw InvalidArgument("config: unknown value '" + s + "' for " + key);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where)
{
    if (!j.is_object())
        throw InvalidArgument(std::string("config: ") + where + " must be an object");
    for (const auto& [k, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || k == a;
        if (!ok)
            throw InvalidArgument("config: unknown key '" + k + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    const json& v = j.at(key);
    if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer())
            throw InvalidArgument(std::string("config: ") + key + " must be an integer");
    } else {
        if (!v.is_number())
            throw InvalidArgument(std::string("config: ") + key + " must be a number");
    }
    out = v.get<T>();
}

} // namespace

json to_json(const FlowSolverConfig& c)
{
    return {{"alpha", c.alpha},
            {"lambda_smt", c.lambda_smt},
            {"min_side", c.min_side},
            {"iterations", c.iterations},
            {"step", c.step},
            {"charbonnier_eps", c.charbonnier_eps},
            {"tolerance", c.tolerance}};
}

json to_json(const LossConfig& c)
{
    return {{"alpha", c.alpha},
            {"beta", c.beta},
            {"lambda_smt", c.lambda_smt},
            {"lambda_prc", c.lambda_prc},
            {"lambda_sty", c.lambda_sty},
            {"lambda_var", c.lambda_var},
            {"lambda_seg", c.lambda_seg},
            {"ssim_window", {{"size", c.ssim_window.size}, {"sigma", c.ssim_window.sigma}}},
            {"normalization", name_of(kNorms, c.norm)}};
}

json to_json(const PipelineConfig& c)
{
    return {{"predictor", name_of(kPredictors, c.predictor)},
            {"extrapolation", name_of(kExtrap, c.extrapolation)},
            {"inpainter", name_of(kInpainters, c.inpainter)},
            {"mask_source", name_of(kMasks, c.mask)},
            {"border", name_of(kBorders, c.border)},
            {"solver", to_json(c.solver)},
            {"loss", to_json(c.loss)}};
}

PipelineConfig pipeline_config_from_json(const json& j)
{
    PipelineConfig c;
    check_keys(j, {"predictor", "extrapolation", "inpainter", "mask_source", "border", "solver", "loss"}, "config");
    if (j.contains("predictor"))
        c.predictor = parse_enum(kPredictors, j["predictor"], "predictor");
    if (j.contains("extrapolation"))
        c.extrapolation = parse_enum(kExtrap, j["extrapolation"], "extrapolation");
    if (j.contains("inpainter"))
        c.inpainter = parse_enum(kInpainters, j["inpainter"], "inpainter");
    if (j.contains("mask_source"))
        c.mask = parse_enum(kMasks, j["mask_source"], "mask_source");
    if (j.contains("border"))
        c.border = parse_enum(kBorders, j["border"], "border");
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, {"alpha", "lambda_smt", "min_side", "iterations", "step", "charbonnier_eps", "tolerance"},
                   "solver");
        read(s, "alpha", c.solver.alpha);
        read(s, "lambda_smt", c.solver.lambda_smt);
        read(s, "min_side", c.solver.min_side);
        read(s, "iterations", c.solver.iterations);
        read(s, "step", c.solver.step);
        read(s, "charbonnier_eps", c.solver.charbonnier_eps);
        read(s, "tolerance", c.solver.tolerance);
    }
    if (j.contains("loss")) {
        const json& l = j["loss"];
        check_keys(l,
                   {"alpha", "beta", "lambda_smt", "lambda_prc", "lambda_sty", "lambda_var", "lambda_seg",
                    "ssim_window", "normalization"},
                   "loss");
        read(l, "alpha", c.loss.alpha);
        read(l, "beta", c.loss.beta);
        read(l, "lambda_smt", c.loss.lambda_smt);
        read(l, "lambda_prc", c.loss.lambda_prc);
        read(l, "lambda_sty", c.loss.lambda_sty);
        read(l, "lambda_var", c.loss.lambda_var);
        read(l, "lambda_seg", c.loss.lambda_seg);
        if (l.contains("ssim_window")) {
            const json& w = l["ssim_window"];
            check_keys(w, {"size", "sigma"}, "loss.ssim_window");
            read(w, "size", c.loss.ssim_window.size);
            read(w, "sigma", c.loss.ssim_window.sigma);
        }
        if (l.contains("normalization"))
            c.loss.norm = parse_enum(kNorms, l["normalization"], "normalization");
    }
    c.validate();
    return c;
}

} // namespace flowgate
