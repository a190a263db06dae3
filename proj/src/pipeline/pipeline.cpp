#include "flowgate/pipeline.hpp"

#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "flowgate/core/ops.hpp"
#include "flowgate/inpaint.hpp"
#include "flowgate/warpcore.hpp"

namespace flowgate {

void PipelineConfig::validate() const
{
    if (predictor == PredictorKind::Variational)
        solver.validate();
    loss.validate();
}

std::unique_ptr<FlowPredictor> make_predictor(const PipelineConfig& cfg)
{
    switch (cfg.predictor) {
    case PredictorKind::Variational:
        return std::make_unique<VariationalExtrapolator>(cfg.solver, cfg.extrapolation);
    case PredictorKind::Oracle:
        return std::make_unique<GroundTruthOracle>();
    case PredictorKind::Zero:
        return std::make_unique<ZeroFlow>();
    }
    throw InvalidArgument("unknown predictor");
}

namespace {

// Half-resolution round trip used by the no-occlusion-map stub.
Frame blur_stub(const Frame& warped)
{
    const int h = warped.height(), w = warped.width();
    const Frame down = resize_bilinear(warped, std::max(1, (h + 1) / 2), std::max(1, (w + 1) / 2));
    const Frame up = resize_bilinear(down, h, w);
    Frame out(h, w, warped.channels());
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = 0.5 * warped.data()[i] + 0.5 * up.data()[i];
    return out;
}

} // namespace

Prediction predict_from_flows(const Clip& clip, const FlowPair& flows, const PipelineConfig& cfg)
{
    const std::size_t n = clip.frames.size();
    if (n < 2)
        throw InvalidArgument("predict_next: need at least 2 history frames");
    const Frame& last = clip.frames.back();

    Prediction p;
    p.flow_fwd = flows.forward;
    p.flow_bwd = flows.backward;
    p.warped = backward_warp(last, p.flow_bwd, cfg.border);
    OcclusionResult occ = occlusion_pipeline(p.flow_fwd);
    p.energy = std::move(occ.energy);

    switch (cfg.mask) {
    case MaskSource::Computed:
        p.mask = std::move(occ.mask);
        break;
    case MaskSource::AllOnes:
        p.mask = OcclusionMap(last.height(), last.width(), 1);
        break;
    case MaskSource::Oracle:
        if (clip.gt_occlusion.size() < n)
            throw InvalidArgument("predict_next: clip has no ground-truth occlusion for this step");
        p.mask = clip.gt_occlusion[n - 1];
        break;
    case MaskSource::BlendStub:
        p.mask = OcclusionMap(last.height(), last.width(), 0);
        break;
    }

    if (cfg.inpainter == InpainterKind::None)
        p.inpainted = p.warped;
    else if (cfg.mask == MaskSource::BlendStub)
        p.inpainted = blur_stub(p.warped);
    else if (p.mask.count_valid() == 0 || p.mask.count_valid() == p.mask.pixel_count())
        p.inpainted = p.warped; // nothing to fill, or nothing to fill from
    else
        p.inpainted = pullpush_inpaint(p.warped, p.mask);

    p.final = compose(p.warped, p.inpainted, p.mask);
    return p;
}

Prediction predict_next(const Clip& clip, const PipelineConfig& cfg)
{
    cfg.validate();
    const auto predictor = make_predictor(cfg);
    return predict_from_flows(clip, predict_flows(clip, *predictor), cfg);
}

std::vector<Prediction> predict_multi(const Clip& clip, int horizon, const PipelineConfig& cfg)
{
    if (horizon < 1)
        throw InvalidArgument("predict_multi: horizon must be at least 1");
    Clip work = clip;
    std::vector<Prediction> out;
    out.reserve(horizon);
    for (int s = 0; s < horizon; ++s) {
        out.push_back(predict_next(work, cfg));
        work.frames.push_back(out.back().final);
    }
    return out;
}

std::vector<AblationVariant> default_variants(const PipelineConfig& base)
{
    std::vector<AblationVariant> v;
    PipelineConfig c = base;
    c.mask = MaskSource::AllOnes;
    v.push_back({"warp_only", c});
    c.mask = MaskSource::BlendStub;
    c.inpainter = InpainterKind::PullPush;
    v.push_back({"no_occlusion_map_stub", c});
    c.mask = MaskSource::Computed;
    v.push_back({"computed_mask", c});
    return v;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn)
{
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err)
                        err = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

namespace {

bool same_flow_source(const PipelineConfig& a, const PipelineConfig& b)
{
    if (a.predictor != b.predictor)
        return false;
    if (a.predictor != PredictorKind::Variational)
        return true;
    return a.extrapolation == b.extrapolation && a.solver == b.solver;
}

struct ClipScores {
    std::vector<StepMetrics> per_variant;
};

} // namespace

std::vector<AblationRow> run_ablation(const std::vector<NamedSuite>& suites,
                                      const std::vector<AblationVariant>& variants, int jobs)
{
    for (const auto& v : variants)
        v.cfg.validate();
    std::vector<AblationRow> rows;
    for (const NamedSuite& suite : suites) {
        const int n = static_cast<int>(suite.clips.size());
        std::vector<ClipScores> scores(n);
        parallel_for(n, jobs, [&](int i) {
            const Clip& full = suite.clips[i].clip;
            const std::size_t T = full.frames.size();
            if (T < 3)
                throw InvalidArgument("run_ablation: clips need at least 3 frames");
            const Clip hist = full.history(T - 1);
            const Frame& target = full.frames[T - 1];
            const OcclusionMap* gt_mask = full.gt_occlusion.size() >= T - 1 ? &full.gt_occlusion[T - 2] : nullptr;
            // Variants that share a flow source reuse one flow prediction.
            std::vector<std::pair<const PipelineConfig*, FlowPair>> cache;
            for (const AblationVariant& v : variants) {
                const FlowPair* flows = nullptr;
                for (const auto& [cfg, fp] : cache)
                    if (same_flow_source(*cfg, v.cfg))
                        flows = &fp;
                if (!flows) {
                    cache.emplace_back(&v.cfg, predict_flows(hist, *make_predictor(v.cfg)));
                    flows = &cache.back().second;
                }
                const Prediction p = predict_from_flows(hist, *flows, v.cfg);
                PredictionAux aux;
                aux.mask = &p.mask;
                aux.gt_mask = gt_mask;
                scores[i].per_variant.push_back(evaluate_prediction(p.final, target, aux));
            }
        });
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            AblationRow r;
            r.suite = suite.name;
            r.variant = variants[vi].name;
            r.clips = n;
            for (const ClipScores& s : scores) {
                r.psnr += s.per_variant[vi].psnr;
                r.ssim += s.per_variant[vi].ssim;
                r.iou_occluded += s.per_variant[vi].iou_occluded.value_or(0.0);
            }
            if (n > 0) {
                r.psnr /= n;
                r.ssim /= n;
                r.iou_occluded /= n;
            }
            rows.push_back(r);
        }
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows)
{
    std::ostringstream os;
    os << "suite,variant,clips,psnr,ssim,iou_occluded\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.suite << ',' << r.variant << ',' << r.clips << ',' << r.psnr << ',' << r.ssim << ','
           << r.iou_occluded << '\n';
    return os.str();
}

nlohmann::json ablation_json(const std::vector<AblationRow>& rows)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows)
        a.push_back({{"suite", r.suite},
                     {"variant", r.variant},
                     {"clips", r.clips},
                     {"psnr", r.psnr},
                     {"ssim", r.ssim},
                     {"iou_occluded", r.iou_occluded}});
    return a;
}

} // namespace flowgate
