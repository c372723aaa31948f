#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detvlm/detection/labels.hpp"

namespace detvlm::detection {

enum class SourceKind { LabelDirectory, ExternalCommand, Fixture };

SourceKind parse_source_kind(std::string_view name);
std::string_view to_string(SourceKind kind);

// Where detections come from.
//  - LabelDirectory: `location` is a directory holding `<image_id>.txt`.
//  - ExternalCommand: `location` is a shell command template; `{image}` is
//    replaced by the quoted absolute image path and stdout is read as
//    detection labels.
//  - Fixture: `location` is a JSON file mapping image_id to an array of
//    detection label lines.
struct DetectionSource {
  SourceKind kind = SourceKind::LabelDirectory;
  std::string location;

  // Throws std::invalid_argument if location is empty.
  void validate() const;
};

// Throws NoDetectionsError when the source has nothing for the image, and
// DetectorError when an external command fails or prints garbage.
std::vector<Detection> provide_detections(const DetectionSource& source, const std::string& image_id,
                                          const std::filesystem::path& image_path);

// Label-directory files may be ground truth (5 fields) or detections (6
// fields); a missing confidence reads as 1.
std::vector<Detection> parse_any_labels(std::string_view text);

// Detections of `class_filter` (all classes when empty) with confidence at
// least `min_confidence`.
std::size_t count_objects(std::span<const Detection> dets, std::optional<int> class_filter = std::nullopt,
                          double min_confidence = 0.0);

}  // namespace detvlm::detection
