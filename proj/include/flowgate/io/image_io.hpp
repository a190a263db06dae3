#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate::io {

/// 8-bit PNG to a Frame with samples v/255. Gray (+alpha) gives 1 channel,
/// everything else 3 channels; alpha is dropped, 16-bit input is reduced to 8.
Frame read_png(const std::filesystem::path& path);

/// Writes round(clamp(v,0,1)*255) as 8-bit gray or RGB.
void write_png(const std::filesystem::path& path, const Frame& frame);

/// Mask PNG: pixels >= 128 read as 1.
OcclusionMap read_mask_png(const std::filesystem::path& path);
/// Writes {0, 255} 8-bit gray.
void write_mask_png(const std::filesystem::path& path, const OcclusionMap& mask);

/// Energy scale used by the 16-bit PNG encoding: stored = round(E * 16384),
/// saturating at 65535 (E ~ 4.0).
inline constexpr double kEnergyPngScale = 16384.0;
void write_energy_png16(const std::filesystem::path& path, const EnergyMap& energy);
EnergyMap read_energy_png16(const std::filesystem::path& path);

/// Low-level 8/16-bit writer used by the helpers above and the visualizer.
void write_png_raw(const std::filesystem::path& path, int width, int height, int channels, int bit_depth,
                   const std::vector<std::uint16_t>& samples);

} // namespace flowgate::io
