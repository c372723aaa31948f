#include "detvlm/imagery/overlay.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace detvlm::imagery {
namespace {

void check_inputs(std::span<const PixelRect> boxes, const OverlayStyle& style) {
  style.validate();
  for (const auto& b : boxes) {
    if (b.x_min > b.x_max || b.y_min > b.y_max) throw std::invalid_argument("rectangle has min > max");
  }
}

}  // namespace

void OverlayStyle::validate() const {
  if (thickness < 1) throw std::invalid_argument("overlay thickness must be >= 1");
}

RasterImage render_overlays(const RasterImage& img, std::span<const PixelRect> boxes, const OverlayStyle& style) {
  check_inputs(boxes, style);
  RasterImage out = img;
  if (boxes.empty() || img.empty()) return out;

  const int width = img.width();
  const int height = img.height();
  const int t = style.thickness;
#pragma omp parallel for schedule(dynamic, 16)
  for (int y = 0; y < height; ++y) {
    for (const auto& b : boxes) {
      if (y < b.y_min || y > b.y_max) continue;
      const int x_lo = std::max(b.x_min, 0);
      const int x_hi = std::min(b.x_max, width - 1);
      if (x_lo > x_hi) continue;
      const bool horizontal_band = y < b.y_min + t || y > b.y_max - t;
      if (horizontal_band) {
        for (int x = x_lo; x <= x_hi; ++x) out.set(x, y, style.color);
        continue;
      }
      // Left and right bands only.
      const int left_hi = std::min(x_hi, b.x_min + t - 1);
      for (int x = x_lo; x <= left_hi; ++x) out.set(x, y, style.color);
      const int right_lo = std::max(x_lo, b.x_max - t + 1);
      for (int x = right_lo; x <= x_hi; ++x) out.set(x, y, style.color);
    }
  }
  return out;
}

namespace serial {

RasterImage render_overlays(const RasterImage& img, std::span<const PixelRect> boxes, const OverlayStyle& style) {
  check_inputs(boxes, style);
  RasterImage out = img;
  for (const auto& b : boxes) {
    const int y_lo = std::max(b.y_min, 0);
    const int y_hi = std::min(b.y_max, img.height() - 1);
    const int x_lo = std::max(b.x_min, 0);
    const int x_hi = std::min(b.x_max, img.width() - 1);
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        if (in_perimeter_band(b, style.thickness, x, y)) out.set(x, y, style.color);
      }
    }
  }
  return out;
}

}  // namespace serial

}  // namespace detvlm::imagery
