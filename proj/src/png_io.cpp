// SPDX-License-Identifier: Apache-2.0

#include "panoweave/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace panoweave {
namespace {

std::uint8_t quantize(float v) {
    if (!(v > 0.0f)) return 0;  // also maps NaN to 0
    if (v >= 1.0f) return 255;
    return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

std::vector<std::uint8_t> encode_raw(const std::vector<std::uint8_t>& raw, Size size, png_uint_32 format) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(size.width);
    image.height = static_cast<png_uint_32>(size.height);
    image.format = format;

    png_alloc_size_t bytes = 0;
    if (!png_image_write_to_memory(&image, nullptr, &bytes, 0, raw.data(), 0, nullptr))
        throw IoError(std::string("png encode failed: ") + image.message);
    std::vector<std::uint8_t> out(bytes);
    if (!png_image_write_to_memory(&image, out.data(), &bytes, 0, raw.data(), 0, nullptr))
        throw IoError(std::string("png encode failed: ") + image.message);
    out.resize(bytes);
    return out;
}

template <typename F>
std::vector<std::uint8_t> encode_gray(const F& field) {
    std::vector<std::uint8_t> raw(field.pixel_count());
    std::transform(field.values().begin(), field.values().end(), raw.begin(), quantize);
    return encode_raw(raw, field.size(), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> decode_raw(std::span<const std::uint8_t> bytes, png_uint_32 format, Size& size) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw IoError(std::string("png decode failed: ") + image.message);
    image.format = format;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError(std::string("png decode failed: ") + image.message);
    }
    size = {static_cast<int>(image.width), static_cast<int>(image.height)};
    return raw;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ViewImage& image) {
    std::vector<std::uint8_t> raw(image.values().size());
    std::transform(image.values().begin(), image.values().end(), raw.begin(), quantize);
    return encode_raw(raw, image.size(), PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const Mask& mask) { return encode_gray(mask); }
std::vector<std::uint8_t> encode_png(const RiskMap& risk) { return encode_gray(risk); }

ViewImage decode_png_image(std::span<const std::uint8_t> bytes) {
    Size size;
    const auto raw = decode_raw(bytes, PNG_FORMAT_RGB, size);
    ViewImage image(size);
    std::transform(raw.begin(), raw.end(), image.values().begin(), [](std::uint8_t v) { return v / 255.0f; });
    return image;
}

Mask decode_png_mask(std::span<const std::uint8_t> bytes) {
    Size size;
    const auto raw = decode_raw(bytes, PNG_FORMAT_GRAY, size);
    Mask mask(size);
    std::transform(raw.begin(), raw.end(), mask.values().begin(), [](std::uint8_t v) { return v / 255.0f; });
    return mask;
}

void write_png(const std::filesystem::path& path, const ViewImage& image) { write_file(path, encode_png(image)); }
void write_png(const std::filesystem::path& path, const Mask& mask) { write_file(path, encode_png(mask)); }
void write_png(const std::filesystem::path& path, const RiskMap& risk) { write_file(path, encode_png(risk)); }

ViewImage read_png_image(const std::filesystem::path& path) { return decode_png_image(read_file(path)); }
Mask read_png_mask(const std::filesystem::path& path) { return decode_png_mask(read_file(path)); }

}  // namespace panoweave
