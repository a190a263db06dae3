// flowgate command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
// inconsistent input, bad config values).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowgate/inpaint.hpp"
#include "flowgate/io/clip_io.hpp"
#include "flowgate/io/flo_io.hpp"
#include "flowgate/io/image_io.hpp"
#include "flowgate/pipeline.hpp"
#include "flowgate/viz.hpp"
#include "flowgate/warpcore.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flowgate;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// --seed beats FLOWGATE_SEED, which beats the built-in default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback)
{
    if (flag)
        return *flag;
    if (const char* env = std::getenv("FLOWGATE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw InvalidArgument(std::string("FLOWGATE_SEED is not an unsigned integer: ") + env);
        return v;
    }
    return fallback;
}

PipelineConfig load_config(const std::string& path)
{
    if (path.empty())
        return {};
    std::ifstream is(path);
    if (!is)
        throw DataError("cannot open config " + path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw DataError("config " + path + ": " + e.what());
    }
    return pipeline_config_from_json(j);
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw DataError("cannot write " + path.string());
    os << text;
}

void prepare_parent(const fs::path& p)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

BorderMode parse_border(const std::string& s)
{
    return s == "zero" ? BorderMode::Zero : BorderMode::Clamp;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
    int n = 1;
    std::optional<std::uint64_t> seed;
    std::string out;
    int frames = 3;
    bool fractional = false;
    double max_speed = 5.0;
    double min_speed = 0.0;
    int canvas = 128;
    int channels = 3;
    int sprite_min = 16;
    int sprite_max = 64;
    int jobs = 1;
};

void add_suite_flags(CLI::App* c, SynthOpts& o)
{
    c->add_option("--seed", o.seed, "suite seed (default: FLOWGATE_SEED or 7)");
    c->add_option("--frames", o.frames, "frames per clip")->check(CLI::Range(3, 1000));
    c->add_flag("--fractional", o.fractional, "sub-pixel velocities and start positions");
    c->add_option("--max-speed", o.max_speed, "bound on |u| and |v|, px/frame")->check(CLI::Range(0.0, 1e6));
    c->add_option("--min-speed", o.min_speed, "lower bound on the speed")->check(CLI::Range(0.0, 1e6));
    c->add_option("--canvas", o.canvas, "canvas side")->check(CLI::Range(4, 8192));
    c->add_option("--channels", o.channels, "1 or 3")->check(CLI::IsMember({1, 3}));
    c->add_option("--sprite-min", o.sprite_min, "smallest sprite side")->check(CLI::Range(1, 8192));
    c->add_option("--sprite-max", o.sprite_max, "largest sprite side")->check(CLI::Range(1, 8192));
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1, 1024));
}

synth::SuiteParams suite_params(const SynthOpts& o)
{
    synth::SuiteParams p;
    p.canvas = o.canvas;
    p.channels = o.channels;
    p.sprite_min = o.sprite_min;
    p.sprite_max = o.sprite_max;
    p.max_speed = o.max_speed;
    p.min_speed = o.min_speed;
    p.integer_velocity = !o.fractional;
    p.num_frames = o.frames;
    return p;
}

int run_synth(const SynthOpts& o)
{
    const auto specs = synth::generate_suite(o.n, resolve_seed(o.seed, 7), suite_params(o));
    fs::create_directories(o.out);
    parallel_for(static_cast<int>(specs.size()), o.jobs, [&](int i) {
        char name[32];
        std::snprintf(name, sizeof name, "clip_%03d", i);
        io::write_clip_dir(fs::path(o.out) / name, synth::generate_clip(specs[i]));
    });
    std::cout << "wrote " << specs.size() << " clips to " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- flow

struct FlowOpts {
    std::string src, dst, out, gt, config;
    bool trace = false;
};

int run_flow(const FlowOpts& o)
{
    const PipelineConfig cfg = load_config(o.config);
    const Frame src = io::read_png(o.src);
    const Frame dst = io::read_png(o.dst);
    if (!src.same_shape(dst))
        throw DataError("flow: --src and --dst differ in shape");
    const FlowEstimate est = estimate_flow_traced(src, dst, cfg.solver);
    prepare_parent(o.out);
    io::write_flo(o.out, est.flow);
    if (o.trace)
        for (const LevelTrace& t : est.levels)
            std::cout << "level " << t.height << "x" << t.width << ": steps " << t.objective.size() - 1
                      << ", objective " << fmt(t.objective.front()) << " -> " << fmt(t.objective.back()) << "\n";
    if (!o.gt.empty()) {
        const FlowField gt = io::read_flo(o.gt, FlowDirection::Backward);
        if (!gt.same_grid(est.flow))
            throw DataError("flow: --gt has a different size");
        std::cout << "epe: " << fmt(endpoint_error(est.flow, gt).mean) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- warp / occlude / inpaint

struct WarpOpts {
    std::string src, flow, out, border = "clamp";
};

int run_warp(const WarpOpts& o)
{
    const Frame src = io::read_png(o.src);
    const FlowField f = io::read_flo(o.flow, FlowDirection::Backward);
    if (!f.same_grid(src))
        throw DataError("warp: flow and frame sizes differ");
    prepare_parent(o.out);
    io::write_png(o.out, backward_warp(src, f, parse_border(o.border)));
    return 0;
}

struct OccludeOpts {
    std::string flow, out, energy, energy_raw;
};

int run_occlude(const OccludeOpts& o)
{
    const FlowField f = io::read_flo(o.flow, FlowDirection::Forward);
    const OcclusionResult r = occlusion_pipeline(f);
    prepare_parent(o.out);
    io::write_mask_png(o.out, r.mask);
    if (!o.energy.empty()) {
        prepare_parent(o.energy);
        io::write_energy_png16(o.energy, r.energy);
    }
    if (!o.energy_raw.empty()) {
        prepare_parent(o.energy_raw);
        io::write_energy_plane(o.energy_raw, r.energy);
    }
    const double frac = 1.0 - static_cast<double>(r.mask.count_valid()) / static_cast<double>(r.mask.pixel_count());
    std::cout << "occluded_fraction: " << fmt(frac) << "\n";
    return 0;
}

struct InpaintOpts {
    std::string frame, mask, out;
};

int run_inpaint(const InpaintOpts& o)
{
    const Frame f = io::read_png(o.frame);
    const OcclusionMap m = io::read_mask_png(o.mask);
    if (!m.same_grid(f))
        throw DataError("inpaint: mask and frame sizes differ");
    prepare_parent(o.out);
    io::write_png(o.out, pullpush_inpaint(f, m));
    return 0;
}

// ---------------------------------------------------------------- predict

struct PredictOpts {
    std::string clip, config, out;
    int horizon = 1;
    bool holdout = false;
};

int run_predict(const PredictOpts& o)
{
    const PipelineConfig cfg = load_config(o.config);
    const Clip full = io::read_clip_dir(o.clip);
    const std::size_t n = full.frames.size();
    const std::size_t hist_len = o.holdout ? n - std::min<std::size_t>(n, o.horizon) : n;
    if (hist_len < 2)
        throw DataError("predict: need at least 2 history frames");
    const Clip hist = full.history(hist_len);
    const auto preds = predict_multi(hist, o.horizon, cfg);

    const fs::path out(o.out);
    fs::create_directories(out);
    const Prediction& last = preds.back();
    io::write_png(out / "final.png", last.final);
    io::write_png(out / "warped.png", last.warped);
    io::write_mask_png(out / "mask.png", last.mask);
    io::write_energy_png16(out / "energy.png", last.energy);
    io::write_flo(out / "flow.flo", last.flow_bwd);
    io::write_flo(out / "flow_fwd.flo", last.flow_fwd);
    if (o.horizon > 1)
        for (int s = 0; s < o.horizon; ++s) {
            char name[32];
            std::snprintf(name, sizeof name, "final_%03d.png", s);
            io::write_png(out / name, preds[s].final);
        }

    Report rep;
    rep.clip_id = fs::path(o.clip).lexically_normal().filename().string();
    if (rep.clip_id.empty())
        rep.clip_id = fs::path(o.clip).lexically_normal().parent_path().filename().string();
    rep.config_echo = to_json(cfg);
    if (o.holdout)
        for (int s = 0; s < o.horizon; ++s) {
            const std::size_t t = hist_len + s; // index of the target frame
            PredictionAux aux;
            aux.flow = &preds[s].flow_bwd;
            aux.mask = &preds[s].mask;
            if (full.gt_backward.size() >= t)
                aux.gt_flow = &full.gt_backward[t - 1];
            if (full.gt_occlusion.size() >= t)
                aux.gt_mask = &full.gt_occlusion[t - 1];
            rep.steps.push_back(evaluate_prediction(preds[s].final, full.frames[t], aux));
        }
    write_text(out / "report.json", to_json(rep).dump(2) + "\n");
    if (!rep.steps.empty()) {
        const StepMetrics m = rep.means();
        std::cout << "psnr: " << fmt(m.psnr) << "\nssim: " << fmt(m.ssim) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- ablate

struct AblateOpts {
    SynthOpts suite;
    std::vector<std::string> clip_dirs;
    double min_occluded = 0.02;
    std::string config, out, json_out;
};

int run_ablate(const AblateOpts& o)
{
    const PipelineConfig base = load_config(o.config);
    std::vector<NamedSuite> suites;
    if (o.clip_dirs.empty()) {
        NamedSuite s{o.suite.fractional ? "synth_fractional" : "synth_integer", {}};
        s.clips = synth::generate_filtered_suite(o.suite.n, resolve_seed(o.suite.seed, 7), suite_params(o.suite),
                                                 o.min_occluded);
        suites.push_back(std::move(s));
    } else {
        // each directory is a suite whose subdirectories are clips
        for (const std::string& d : o.clip_dirs) {
            NamedSuite s{fs::path(d).lexically_normal().filename().string(), {}};
            std::vector<fs::path> dirs;
            if (!fs::is_directory(d))
                throw DataError("ablate: not a directory: " + d);
            for (const auto& e : fs::directory_iterator(d))
                if (e.is_directory())
                    dirs.push_back(e.path());
            std::sort(dirs.begin(), dirs.end());
            for (const fs::path& cd : dirs) {
                synth::LabeledClip lc;
                lc.clip = io::read_clip_dir(cd);
                if (lc.clip.frames.size() < 3)
                    throw DataError("ablate: " + cd.string() + " has fewer than 3 frames");
                s.clips.push_back(std::move(lc));
            }
            suites.push_back(std::move(s));
        }
    }
    const auto rows = run_ablation(suites, default_variants(base), o.suite.jobs);
    const std::string csv = ablation_csv(rows);
    if (o.out.empty())
        std::cout << csv;
    else
        write_text(o.out, csv);
    if (!o.json_out.empty())
        write_text(o.json_out, json{{"rows", ablation_json(rows)}, {"config", to_json(base)}}.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
    std::string pred, gt, flow, gt_flow, mask, gt_mask, json_out, config;
    bool losses = false;
    std::string format = "text";
};

int run_eval(const EvalOpts& o)
{
    const Frame pred = io::read_png(o.pred);
    const Frame gt = io::read_png(o.gt);
    if (!pred.same_shape(gt))
        throw DataError("eval: --pred and --gt differ in shape");
    std::optional<FlowField> f, gf;
    std::optional<OcclusionMap> m, gm;
    if (!o.flow.empty())
        f = io::read_flo(o.flow, FlowDirection::Backward);
    if (!o.gt_flow.empty())
        gf = io::read_flo(o.gt_flow, FlowDirection::Backward);
    if (!o.mask.empty())
        m = io::read_mask_png(o.mask);
    if (!o.gt_mask.empty())
        gm = io::read_mask_png(o.gt_mask);
    if ((f && !f->same_grid(gt)) || (gf && !gf->same_grid(gt)) || (m && !m->same_grid(gt)) ||
        (gm && !gm->same_grid(gt)))
        throw DataError("eval: auxiliary inputs differ in size from the frames");

    PredictionAux aux;
    aux.flow = f ? &*f : nullptr;
    aux.gt_flow = gf ? &*gf : nullptr;
    aux.mask = m ? &*m : nullptr;
    aux.gt_mask = gm ? &*gm : nullptr;

    Report rep;
    rep.clip_id = fs::path(o.pred).stem().string();
    rep.steps.push_back(evaluate_prediction(pred, gt, aux));
    json j = to_json(rep);

    // flat key/value view
    std::vector<std::pair<std::string, double>> kv;
    const StepMetrics& s = rep.steps.front();
    kv.emplace_back("psnr", s.psnr);
    kv.emplace_back("ssim", s.ssim);
    if (s.epe)
        kv.emplace_back("epe", *s.epe);
    if (s.iou_occluded)
        kv.emplace_back("iou_occluded", *s.iou_occluded);
    if (o.losses) {
        const PipelineConfig cfg = load_config(o.config);
        const OcclusionMap ones(gt.height(), gt.width(), 1);
        const OcclusionMap& mm = m ? *m : ones;
        json lj;
        auto put = [&](const std::string& k, double v) {
            kv.emplace_back("loss." + k, v);
            lj[k] = v;
        };
        put("masked_pixel", masked_pixel_loss(pred, gt, mm, cfg.loss.alpha, cfg.loss.norm, cfg.loss.ssim_window));
        put("masked_pixel_complement", masked_pixel_loss(pred, gt, mm.inverted(), cfg.loss.alpha, cfg.loss.norm,
                                                         cfg.loss.ssim_window));
        put("pixel_reconstruction", pixel_reconstruction_loss(pred, gt, mm, cfg.loss));
        put("total_variation", total_variation(pred, cfg.loss.norm));
        if (f)
            put("smoothness", smoothness_loss(*f, gt, cfg.loss.norm));
        j["losses"] = lj;
    }

    if (o.format == "json") {
        json flat = json::object();
        for (const auto& [k, v] : kv)
            flat[k] = v;
        std::cout << flat.dump(2) << "\n";
    } else {
        for (const auto& [k, v] : kv)
            std::cout << k << ": " << fmt(v) << "\n";
    }
    if (!o.json_out.empty())
        write_text(o.json_out, j.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- viz

struct VizOpts {
    std::string flow, frame, mask, out;
    double max_radius = 0.0;
};

int run_viz(const VizOpts& o)
{
    prepare_parent(o.out);
    if (!o.flow.empty()) {
        const FlowField f = io::read_flo(o.flow, FlowDirection::Backward);
        io::write_png(o.out, viz::flow_to_color(f, o.max_radius));
        return 0;
    }
    if (o.frame.empty() || o.mask.empty())
        throw CLI::ValidationError("viz", "give --flow, or both --frame and --mask");
    const Frame f = io::read_png(o.frame);
    const OcclusionMap m = io::read_mask_png(o.mask);
    if (!m.same_grid(f))
        throw DataError("viz: mask and frame sizes differ");
    io::write_png(o.out, viz::overlay_mask(f, m));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"flowgate: flow extrapolation, occlusion-gated warping and inpainting"};
    app.require_subcommand(0, 1);
    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the default pipeline config as JSON and exit");

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "render a seeded suite of sprite clips with ground truth");
    synth->add_option("--n", so.n, "number of clips")->check(CLI::Range(0, 1000000));
    synth->add_option("--out", so.out, "output directory")->required();
    add_suite_flags(synth, so);

    FlowOpts fo;
    auto* flow = app.add_subcommand("flow", "estimate backward flow on the --dst grid");
    flow->add_option("--src", fo.src, "source frame (sampled)")->required();
    flow->add_option("--dst", fo.dst, "destination frame (flow grid)")->required();
    flow->add_option("--out", fo.out, "output .flo")->required();
    flow->add_option("--gt", fo.gt, "ground-truth backward .flo; prints EPE");
    flow->add_option("--config", fo.config, "pipeline config JSON (solver section used)");
    flow->add_flag("--trace", fo.trace, "print per-level objective");

    WarpOpts wo;
    auto* warp = app.add_subcommand("warp", "backward-warp a frame with a .flo field");
    warp->add_option("--src", wo.src, "frame to sample")->required();
    warp->add_option("--flow", wo.flow, "backward flow on the output grid")->required();
    warp->add_option("--out", wo.out, "output PNG")->required();
    warp->add_option("--border", wo.border, "clamp or zero")->check(CLI::IsMember({"clamp", "zero"}));

    OccludeOpts oo;
    auto* occ = app.add_subcommand("occlude", "occlusion map from a forward flow");
    occ->add_option("--flow", oo.flow, "forward flow .flo")->required();
    occ->add_option("--out", oo.out, "mask PNG (white = valid)")->required();
    occ->add_option("--energy", oo.energy, "16-bit energy PNG");
    occ->add_option("--energy-raw", oo.energy_raw, "float32 energy plane");

    InpaintOpts io_;
    auto* inp = app.add_subcommand("inpaint", "pull-push fill of mask-0 pixels");
    inp->add_option("--frame", io_.frame, "input frame")->required();
    inp->add_option("--mask", io_.mask, "mask PNG, >= 128 is valid")->required();
    inp->add_option("--out", io_.out, "output PNG")->required();

    PredictOpts po;
    auto* pred = app.add_subcommand("predict", "predict the next frame(s) of a clip directory");
    pred->add_option("--clip", po.clip, "directory with frame_%03d.png")->required();
    pred->add_option("--config", po.config, "pipeline config JSON");
    pred->add_option("--out", po.out, "output directory")->required();
    pred->add_option("--horizon", po.horizon, "frames to predict recursively")->check(CLI::Range(1, 1000));
    pred->add_flag("--holdout", po.holdout, "hold back the last --horizon frames and score against them");

    AblateOpts ao;
    auto* abl = app.add_subcommand("ablate", "warp-only / stub / computed-mask comparison table");
    abl->add_option("--n", ao.suite.n, "synthetic clips")->check(CLI::Range(1, 1000000));
    add_suite_flags(abl, ao.suite);
    abl->add_option("--min-occluded", ao.min_occluded, "skip synthetic scenes below this occluded fraction")
        ->check(CLI::Range(0.0, 1.0));
    abl->add_option("--clips", ao.clip_dirs, "suite directories of clip subdirectories (instead of synthesis)")
        ;
    abl->add_option("--config", ao.config, "base pipeline config JSON");
    abl->add_option("--out", ao.out, "CSV path (stdout if omitted)");
    abl->add_option("--json", ao.json_out, "also write the table as JSON");
    ao.suite.n = 50;

    EvalOpts eo;
    auto* ev = app.add_subcommand("eval", "score a predicted frame");
    ev->add_option("--pred", eo.pred, "predicted frame")->required();
    ev->add_option("--gt", eo.gt, "ground-truth frame")->required();
    ev->add_option("--flow", eo.flow, "predicted backward flow");
    ev->add_option("--gt-flow", eo.gt_flow, "ground-truth backward flow");
    ev->add_option("--mask", eo.mask, "predicted mask");
    ev->add_option("--gt-mask", eo.gt_mask, "ground-truth mask");
    ev->add_flag("--losses", eo.losses, "also report loss terms");
    ev->add_option("--config", eo.config, "pipeline config JSON (loss section used)");
    ev->add_option("--format", eo.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    ev->add_option("--json", eo.json_out, "write the full report JSON here");

    VizOpts vo;
    auto* vz = app.add_subcommand("viz", "colour-code a flow, or tint mask-0 pixels of a frame");
    vz->add_option("--flow", vo.flow, ".flo to render");
    vz->add_option("--max-radius", vo.max_radius, "normalising magnitude (default: field maximum)");
    vz->add_option("--frame", vo.frame, "frame for the mask overlay");
    vz->add_option("--mask", vo.mask, "mask PNG");
    vz->add_option("--out", vo.out, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (print_config) {
            std::cout << to_json(PipelineConfig{}).dump(2) << "\n";
            return 0;
        }
        if (synth->parsed())
            return run_synth(so);
        if (flow->parsed())
            return run_flow(fo);
        if (warp->parsed())
            return run_warp(wo);
        if (occ->parsed())
            return run_occlude(oo);
        if (inp->parsed())
            return run_inpaint(io_);
        if (pred->parsed())
            return run_predict(po);
        if (abl->parsed())
            return run_ablate(ao);
        if (ev->parsed())
            return run_eval(eo);
        if (vz->parsed())
            return run_viz(vo);
        std::cerr << app.help();
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        // DataError, InvalidArgument, ContractError, SolverError, filesystem
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
