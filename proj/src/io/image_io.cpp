#include "flowgate/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace flowgate::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw DataError("cannot open " + path.string());
    return f;
}

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint16_t> samples;
};

// keep_16: leave 16-bit samples intact instead of reducing to 8 bits.
Decoded decode(const std::filesystem::path& path, bool keep_16)
{
    FilePtr f = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DataError("not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw DataError("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng: out of memory");
    }

    Decoded d;
    std::vector<png_bytep> rows;
    std::vector<png_byte> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("corrupt PNG: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    if (depth == 16 && !keep_16)
        png_set_strip_16(png);
    if (depth == 16 && keep_16)
        png_set_swap(png);
    png_read_update_info(png, info);

    d.width = static_cast<int>(png_get_image_width(png, info));
    d.height = static_cast<int>(png_get_image_height(png, info));
    d.channels = png_get_channels(png, info);
    d.bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * d.height);
    rows.resize(d.height);
    for (int y = 0; y < d.height; ++y)
        rows[y] = buffer.data() + stride * y;
    // Re-arm so no automatic object is modified between setjmp and a longjmp.
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("corrupt PNG: " + path.string());
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = static_cast<std::size_t>(d.width) * d.height * d.channels;
    d.samples.resize(n);
    if (d.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, buffer.data() + 2 * i, 2);
            d.samples[i] = v;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            d.samples[i] = buffer[i];
    }
    return d;
}

std::uint16_t quantize8(double v)
{
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

void write_png_raw(const std::filesystem::path& path, int width, int height, int channels, int bit_depth,
                   const std::vector<std::uint16_t>& samples)
{
    if (channels != 1 && channels != 3)
        throw InvalidArgument("write_png: 1 or 3 channels supported");
    if (bit_depth != 8 && bit_depth != 16)
        throw InvalidArgument("write_png: bit depth must be 8 or 16");
    if (samples.size() != static_cast<std::size_t>(width) * height * channels)
        throw InvalidArgument("write_png: sample count does not match dimensions");

    const int bpp = bit_depth / 8;
    const std::size_t stride = static_cast<std::size_t>(width) * channels * bpp;
    std::vector<png_byte> buffer(stride * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bpp == 1) {
            buffer[i] = static_cast<png_byte>(samples[i]);
        } else {
            buffer[2 * i] = static_cast<png_byte>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xFF);
        }
    }

    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw DataError("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng: out of memory");
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = buffer.data() + stride * y;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encode failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Frame read_png(const std::filesystem::path& path)
{
    const Decoded d = decode(path, false);
    Frame f(d.height, d.width, d.channels);
    auto data = f.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = d.samples[i] / 255.0;
    return f;
}

void write_png(const std::filesystem::path& path, const Frame& frame)
{
    std::vector<std::uint16_t> s(frame.size());
    auto data = frame.data();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = quantize8(data[i]);
    write_png_raw(path, frame.width(), frame.height(), frame.channels(), 8, s);
}

OcclusionMap read_mask_png(const std::filesystem::path& path)
{
    const Decoded d = decode(path, false);
    OcclusionMap m(d.height, d.width, 0);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            m.set(y, x, d.samples[(static_cast<std::size_t>(y) * d.width + x) * d.channels] >= 128);
    return m;
}

void write_mask_png(const std::filesystem::path& path, const OcclusionMap& mask)
{
    std::vector<std::uint16_t> s(mask.pixel_count());
    auto data = mask.data();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = data[i] ? 255 : 0;
    write_png_raw(path, mask.width(), mask.height(), 1, 8, s);
}

void write_energy_png16(const std::filesystem::path& path, const EnergyMap& energy)
{
    std::vector<std::uint16_t> s(energy.data().size());
    auto data = energy.data();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = static_cast<std::uint16_t>(std::min(65535.0, std::round(std::max(0.0, data[i]) * kEnergyPngScale)));
    write_png_raw(path, energy.width(), energy.height(), 1, 16, s);
}

EnergyMap read_energy_png16(const std::filesystem::path& path)
{
    const Decoded d = decode(path, true);
    if (d.channels != 1 || d.bit_depth != 16)
        throw DataError("energy PNG must be 16-bit grayscale");
    EnergyMap e(d.height, d.width);
    auto data = e.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = d.samples[i] / kEnergyPngScale;
    return e;
}

} // namespace flowgate::io
