#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "detvlm/imagery/raster.hpp"

namespace detvlm::detection {

// Center/size box in fractions of the image. Zero-area boxes are accepted
// (they contribute IoU 0).
struct NormalizedBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const NormalizedBox&, const NormalizedBox&) = default;
};

struct GroundTruthLabel {
  int class_id = 0;
  NormalizedBox box;
  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

struct Detection {
  int class_id = 0;
  NormalizedBox box;
  double confidence = 1.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

// Label text, one record per non-empty line: `class cx cy w h` for ground
// truth, `class cx cy w h confidence` for detections. Throws
// LabelParseError on a malformed token, a value outside [0,1], or the
// wrong number of fields.
std::vector<GroundTruthLabel> parse_ground_truth(std::string_view text);
std::vector<Detection> parse_detections(std::string_view text);

// Inverse of the parsers. Numbers are written in shortest round-trip form,
// one record per line with a trailing newline.
std::string format_label_file(const std::vector<GroundTruthLabel>& labels);
std::string format_label_file(const std::vector<Detection>& detections);

// Reads a whole file; throws IoError.
std::string read_text_file(const std::string& path);

// x_min = round((cx - w/2) * width) and so on, clipped to [0, width] x
// [0, height].
imagery::PixelRect to_pixel_rect(const NormalizedBox& box, int width, int height);

}  // namespace detvlm::detection
