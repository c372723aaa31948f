#pragma once

#include <span>

#include "detvlm/imagery/raster.hpp"

namespace detvlm::imagery {

struct OverlayStyle {
  Rgb color{255, 0, 0};
  int thickness = 2;

  // Throws std::invalid_argument if thickness < 1.
  void validate() const;
};

// True when (x, y) lies in the perimeter band of `rect`: inside the
// rectangle and within `thickness` pixels of one of its edges.
constexpr bool in_perimeter_band(const PixelRect& rect, int thickness, int x, int y) noexcept {
  if (x < rect.x_min || x > rect.x_max || y < rect.y_min || y > rect.y_max) return false;
  return x < rect.x_min + thickness || x > rect.x_max - thickness || y < rect.y_min + thickness ||
         y > rect.y_max - thickness;
}

// Returns a copy of `img` with each rectangle's perimeter band painted in
// `style.color`, clipped to the image. Rectangles must satisfy
// x_min <= x_max and y_min <= y_max (std::invalid_argument otherwise).
// OpenMP-parallel over rows.
RasterImage render_overlays(const RasterImage& img, std::span<const PixelRect> boxes, const OverlayStyle& style);

namespace serial {
RasterImage render_overlays(const RasterImage& img, std::span<const PixelRect> boxes, const OverlayStyle& style);
}

}  // namespace detvlm::imagery
