#include "flowgate/io/flo_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace flowgate::io {

static_assert(std::endian::native == std::endian::little, ".flo I/O assumes a little-endian host");

namespace {

constexpr std::size_t kHeader = 12;
constexpr std::int32_t kMaxSide = 1 << 15;

void put_f32(std::vector<std::uint8_t>& out, float v)
{
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v)
{
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

float get_f32(const std::uint8_t* p)
{
    float v;
    std::memcpy(&v, p, 4);
    return v;
}

std::int32_t get_i32(const std::uint8_t* p)
{
    std::int32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError("short write to " + path.string());
}

// Validates the shared header and returns (width, height).
std::pair<int, int> parse_header(const std::vector<std::uint8_t>& bytes, std::size_t planes)
{
    if (bytes.size() < kHeader)
        throw DataError(".flo: truncated header");
    if (get_f32(bytes.data()) != kFloMagic)
        throw DataError(".flo: bad magic (expected PIEH)");
    const std::int32_t w = get_i32(bytes.data() + 4);
    const std::int32_t h = get_i32(bytes.data() + 8);
    if (w < 1 || h < 1 || w > kMaxSide || h > kMaxSide)
        throw DataError(".flo: implausible dimensions");
    const std::size_t expect = kHeader + static_cast<std::size_t>(w) * h * planes * 4;
    if (bytes.size() != expect)
        throw DataError(".flo: payload size does not match header");
    return {w, h};
}

} // namespace

std::vector<std::uint8_t> encode_flo(const FlowField& flow)
{
    std::vector<std::uint8_t> out;
    out.reserve(kHeader + flow.pixel_count() * 8);
    put_f32(out, kFloMagic);
    put_i32(out, flow.width());
    put_i32(out, flow.height());
    for (double v : flow.data())
        put_f32(out, static_cast<float>(v));
    return out;
}

FlowField decode_flo(const std::vector<std::uint8_t>& bytes, FlowDirection dir)
{
    const auto [w, h] = parse_header(bytes, 2);
    FlowField flow(h, w, dir);
    auto data = flow.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = get_f32(bytes.data() + kHeader + 4 * i);
        if (!std::isfinite(v))
            throw DataError(".flo: non-finite flow component");
        data[i] = v;
    }
    return flow;
}

FlowField read_flo(const std::filesystem::path& path, FlowDirection dir)
{
    return decode_flo(slurp(path), dir);
}

void write_flo(const std::filesystem::path& path, const FlowField& flow)
{
    spit(path, encode_flo(flow));
}

void write_energy_plane(const std::filesystem::path& path, const EnergyMap& energy)
{
    std::vector<std::uint8_t> out;
    out.reserve(kHeader + energy.data().size() * 4);
    put_f32(out, kFloMagic);
    put_i32(out, energy.width());
    put_i32(out, energy.height());
    for (double v : energy.data())
        put_f32(out, static_cast<float>(v));
    spit(path, out);
}

EnergyMap read_energy_plane(const std::filesystem::path& path)
{
    const auto bytes = slurp(path);
    const auto [w, h] = parse_header(bytes, 1);
    EnergyMap e(h, w);
    auto data = e.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float v = get_f32(bytes.data() + kHeader + 4 * i);
        if (!std::isfinite(v) || v < 0.0f)
            throw DataError("energy plane: negative or non-finite value");
        data[i] = v;
    }
    return e;
}

} // namespace flowgate::io
