#pragma once

#include <filesystem>

#include <json.hpp>

#include "flowgate/synthbench.hpp"

namespace flowgate::io {

nlohmann::json to_json(const synth::SceneSpec& s);
synth::SceneSpec scene_spec_from_json(const nlohmann::json& j);

/// Writes frame_%03d.png, fwd_%03d.flo, bwd_%03d.flo, occ_%03d.png and
/// meta.json into `dir`, creating it if needed. Index k of the ground-truth
/// files is the transition k -> k+1.
void write_clip_dir(const std::filesystem::path& dir, const synth::LabeledClip& clip);

/// Reads frame_000.png, frame_001.png, ... until the first gap. Ground truth
/// is loaded only when the file for every transition is present.
Clip read_clip_dir(const std::filesystem::path& dir);

} // namespace flowgate::io
