#include "flowgate/io/clip_io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "flowgate/io/flo_io.hpp"
#include "flowgate/io/image_io.hpp"

namespace flowgate::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path numbered(const fs::path& dir, const char* stem, int k, const char* ext)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03d%s", stem, k, ext);
    return dir / buf;
}

} // namespace

json to_json(const synth::SceneSpec& s)
{
    return {{"seed", s.seed},
            {"canvas_h", s.canvas_h},
            {"canvas_w", s.canvas_w},
            {"channels", s.channels},
            {"sprite_h", s.sprite_h},
            {"sprite_w", s.sprite_w},
            {"start_x", s.start_x},
            {"start_y", s.start_y},
            {"vel_u", s.vel_u},
            {"vel_v", s.vel_v},
            {"num_frames", s.num_frames},
            {"allow_clipping", s.allow_clipping}};
}

synth::SceneSpec scene_spec_from_json(const json& j)
{
    try {
        synth::SceneSpec s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.canvas_h = j.at("canvas_h").get<int>();
        s.canvas_w = j.at("canvas_w").get<int>();
        s.channels = j.at("channels").get<int>();
        s.sprite_h = j.at("sprite_h").get<int>();
        s.sprite_w = j.at("sprite_w").get<int>();
        s.start_x = j.at("start_x").get<double>();
        s.start_y = j.at("start_y").get<double>();
        s.vel_u = j.at("vel_u").get<double>();
        s.vel_v = j.at("vel_v").get<double>();
        s.num_frames = j.at("num_frames").get<int>();
        s.allow_clipping = j.at("allow_clipping").get<bool>();
        return s;
    } catch (const json::exception& e) {
        throw DataError(std::string("scene spec: ") + e.what());
    }
}

void write_clip_dir(const fs::path& dir, const synth::LabeledClip& lc)
{
    fs::create_directories(dir);
    const Clip& c = lc.clip;
    for (std::size_t k = 0; k < c.frames.size(); ++k)
        write_png(numbered(dir, "frame", static_cast<int>(k), ".png"), c.frames[k]);
    for (std::size_t k = 0; k < c.gt_forward.size(); ++k)
        write_flo(numbered(dir, "fwd", static_cast<int>(k), ".flo"), c.gt_forward[k]);
    for (std::size_t k = 0; k < c.gt_backward.size(); ++k)
        write_flo(numbered(dir, "bwd", static_cast<int>(k), ".flo"), c.gt_backward[k]);
    for (std::size_t k = 0; k < c.gt_occlusion.size(); ++k)
        write_mask_png(numbered(dir, "occ", static_cast<int>(k), ".png"), c.gt_occlusion[k]);

    const json meta = {{"spec", to_json(lc.spec)},
                       {"frames", c.frames.size()},
                       {"occluded_fraction", synth::occluded_fraction(lc)}};
    std::ofstream os(dir / "meta.json", std::ios::binary);
    if (!os)
        throw DataError("cannot write " + (dir / "meta.json").string());
    os << meta.dump(2) << '\n';
}

Clip read_clip_dir(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw DataError("not a directory: " + dir.string());
    Clip c;
    for (int k = 0; fs::exists(numbered(dir, "frame", k, ".png")); ++k)
        c.frames.push_back(read_png(numbered(dir, "frame", k, ".png")));
    if (c.frames.empty())
        throw DataError("no frame_000.png in " + dir.string());

    const int n = static_cast<int>(c.frames.size()) - 1;
    auto all_exist = [&](const char* stem, const char* ext) {
        for (int k = 0; k < n; ++k)
            if (!fs::exists(numbered(dir, stem, k, ext)))
                return false;
        return n > 0;
    };
    if (all_exist("fwd", ".flo"))
        for (int k = 0; k < n; ++k)
            c.gt_forward.push_back(read_flo(numbered(dir, "fwd", k, ".flo"), FlowDirection::Forward));
    if (all_exist("bwd", ".flo"))
        for (int k = 0; k < n; ++k)
            c.gt_backward.push_back(read_flo(numbered(dir, "bwd", k, ".flo"), FlowDirection::Backward));
    if (all_exist("occ", ".png"))
        for (int k = 0; k < n; ++k)
            c.gt_occlusion.push_back(read_mask_png(numbered(dir, "occ", k, ".png")));
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw DataError(dir.string() + ": " + e.what());
    }
    return c;
}

} // namespace flowgate::io
