#include "detvlm/imagery/raster.hpp"

#include <stdexcept>
#include <string>

namespace detvlm::imagery {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels);
  for (std::size_t i = 0; i < pixels_.size(); i += kChannels) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

RasterImage RasterImage::from_pixels(int width, int height, std::vector<std::uint8_t> pixels) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels;
  if (pixels.size() != expected) {
    throw std::invalid_argument("pixel buffer has " + std::to_string(pixels.size()) + " bytes, expected " +
                                std::to_string(expected));
  }
  RasterImage img;
  img.width_ = width;
  img.height_ = height;
  img.pixels_ = std::move(pixels);
  return img;
}

}  // namespace detvlm::imagery
