#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate::io {

/// Middlebury tag: the float 202021.25, bytes "PIEH" in little-endian order.
inline constexpr float kFloMagic = 202021.25f;

/// Reads a Middlebury .flo file. The file carries no direction, so the caller
/// states how the field is to be interpreted.
FlowField read_flo(const std::filesystem::path& path, FlowDirection dir);

/// Writes width, height and interleaved float32 (u, v) in row-major order.
void write_flo(const std::filesystem::path& path, const FlowField& flow);

std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(const std::vector<std::uint8_t>& bytes, FlowDirection dir);

/// Same header as .flo followed by a single float32 plane.
void write_energy_plane(const std::filesystem::path& path, const EnergyMap& energy);
EnergyMap read_energy_plane(const std::filesystem::path& path);

} // namespace flowgate::io
