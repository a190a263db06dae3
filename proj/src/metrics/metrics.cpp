#include "flowgate/metrics.hpp"

#include <cmath>

#include "flowgate/simd/kernels.hpp"
#include "flowgate/synthbench.hpp"

namespace flowgate {

double psnr(const Image& x, const Image& y)
{
    if (!x.same_shape(y))
        detail::throw_shape_mismatch("psnr");
    if (x.empty())
        return kPsnrCap;
    const double mse = simd::active().sum_sq_diff(x.data().data(), y.data().data(), x.size()) /
                       static_cast<double>(x.size());
    if (mse <= 0.0)
        return kPsnrCap;
    return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

EndpointError endpoint_error(const FlowField& f, const FlowField& g, const OcclusionMap* mask)
{
    if (!f.same_grid(g) || (mask && (mask->height() != f.height() || mask->width() != f.width())))
        detail::throw_shape_mismatch("endpoint_error");
    EndpointError e;
    e.map = EnergyMap(f.height(), f.width());
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
            const double d = std::hypot(f.u(y, x) - g.u(y, x), f.v(y, x) - g.v(y, x));
            e.map.at(y, x) = d;
            if (!mask || mask->at(y, x)) {
                sum += d;
                ++count;
            }
        }
    e.mean = count ? sum / static_cast<double>(count) : 0.0;
    return e;
}

StepMetrics Report::means() const
{
    StepMetrics m;
    if (steps.empty())
        return m;
    double epe = 0.0, iou = 0.0, lp = 0.0;
    int ne = 0, ni = 0, nl = 0;
    for (const StepMetrics& s : steps) {
        m.psnr += s.psnr;
        m.ssim += s.ssim;
        if (s.epe) {
            epe += *s.epe;
            ++ne;
        }
        if (s.iou_occluded) {
            iou += *s.iou_occluded;
            ++ni;
        }
        if (s.lpips) {
            lp += *s.lpips;
            ++nl;
        }
    }
    m.psnr /= static_cast<double>(steps.size());
    m.ssim /= static_cast<double>(steps.size());
    if (ne)
        m.epe = epe / ne;
    if (ni)
        m.iou_occluded = iou / ni;
    if (nl)
        m.lpips = lp / nl;
    return m;
}

StepMetrics evaluate_prediction(const Frame& pred, const Frame& gt, const PredictionAux& aux)
{
    StepMetrics m;
    m.psnr = psnr(pred, gt);
    m.ssim = ssim(pred, gt).mean;
    if (aux.flow && aux.gt_flow)
        m.epe = endpoint_error(*aux.flow, *aux.gt_flow).mean;
    if (aux.mask && aux.gt_mask)
        m.iou_occluded = synth::iou(*aux.mask, *aux.gt_mask, synth::PositiveClass::Occluded);
    return m;
}

nlohmann::json to_json(const StepMetrics& m)
{
    nlohmann::json j = {{"psnr", m.psnr}, {"ssim", m.ssim}};
    if (m.epe)
        j["epe"] = *m.epe;
    if (m.iou_occluded)
        j["iou_occluded"] = *m.iou_occluded;
    if (m.lpips)
        j["lpips"] = *m.lpips;
    return j;
}

nlohmann::json to_json(const Report& r)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const StepMetrics& s : r.steps)
        steps.push_back(to_json(s));
    return {{"clip_id", r.clip_id}, {"steps", steps}, {"means", to_json(r.means())}, {"config_echo", r.config_echo}};
}

namespace {

StepMetrics step_from_json(const nlohmann::json& j)
{
    StepMetrics m;
    m.psnr = j.at("psnr").get<double>();
    m.ssim = j.at("ssim").get<double>();
    if (j.contains("epe"))
        m.epe = j["epe"].get<double>();
    if (j.contains("iou_occluded"))
        m.iou_occluded = j["iou_occluded"].get<double>();
    if (j.contains("lpips"))
        m.lpips = j["lpips"].get<double>();
    return m;
}

} // namespace

Report report_from_json(const nlohmann::json& j)
{
    try {
        Report r;
        r.clip_id = j.at("clip_id").get<std::string>();
        for (const auto& s : j.at("steps"))
            r.steps.push_back(step_from_json(s));
        if (j.contains("config_echo"))
            r.config_echo = j["config_echo"];
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report: ") + e.what());
    }
}

} // namespace flowgate
