#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "detvlm/imagery/raster.hpp"

namespace detvlm::imagery {

enum class ImageFormat { Png, Jpeg };

// Accepts "png", "jpg", "jpeg" (case-insensitive). Throws UnsupportedFormatError.
ImageFormat parse_image_format(std::string_view tag);

// Decodes any format OpenCV can read, normalized to 8-bit RGB: grayscale is
// expanded and alpha dropped. Throws IoError / DecodeError.
RasterImage load_image(const std::filesystem::path& path);
RasterImage decode_image(std::span<const std::uint8_t> encoded);

// Throws IoError when the file cannot be written.
void save_image(const RasterImage& img, const std::filesystem::path& path, ImageFormat format);

std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format);

// Lossless PNG; this is the payload format sent to VLM backends.
inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  return encode_image(img, ImageFormat::Png);
}

}  // namespace detvlm::imagery
