#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace detvlm::imagery {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Inclusive pixel rectangle: (x_min, y_min) and (x_max, y_max) are both
// inside the rectangle. May extend past the image; drawing clips.
struct PixelRect {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

// 8-bit RGB image, row-major, interleaved channels.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});

  // Takes ownership of `pixels`; throws std::invalid_argument if the size
  // does not equal width * height * 3.
  static RasterImage from_pixels(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return kChannels; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t sample_count() const noexcept { return pixels_.size(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  Rgb at(int x, int y) const noexcept {
    const std::uint8_t* p = &pixels_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    std::uint8_t* p = &pixels_[offset(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace detvlm::imagery
