#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detvlm/detection/source.hpp"
#include "detvlm/gateway/types.hpp"
#include "detvlm/imagery/degrade.hpp"
#include "detvlm/imagery/overlay.hpp"
#include "detvlm/metrics/clipscore.hpp"
#include "detvlm/prompting/prompt.hpp"

namespace detvlm::harness {

inline constexpr int kPlanSchemaVersion = 1;

struct EmbeddingProviderSpec {
  enum class Kind { Stub, File, Remote };
  Kind kind = Kind::Stub;
  std::uint64_t seed = 0;
  std::size_t dimension = 512;
  std::filesystem::path path;  // File
  std::string endpoint;        // Remote
  std::string auth_env;
  std::string response_pointer = "/embedding";
  double timeout_s = 30.0;
};

// A declarative experiment. Relative paths in the plan file are resolved
// against the plan file's directory.
struct ExperimentPlan {
  std::filesystem::path dataset_root;
  std::string image_glob = "*.png";
  std::filesystem::path labels_dir;
  std::optional<std::filesystem::path> truth_counts;
  std::vector<prompting::TaskKind> tasks;
  std::vector<prompting::GroundingCondition> conditions;
  std::vector<gateway::BackendSpec> backends;
  imagery::NoiseSpec noise;  // seed unused; per-image seeds derive from `seed`
  imagery::OverlayStyle overlay;
  double overlay_min_confidence = 0.0;
  detection::DetectionSource detection_source;
  // Run an external detector on the degraded pixels for Degraded+boxes
  // instead of reusing raw-image detections.
  bool detect_on_degraded = false;
  EmbeddingProviderSpec embedding;
  metrics::ClipScoreSpec clip;
  std::optional<std::filesystem::path> prompt_overrides;
  std::filesystem::path cache_path;
  std::filesystem::path output_dir;
  int max_concurrency = 1;
  std::uint64_t seed = 0;

  const gateway::BackendSpec* find_backend(std::string_view name) const;
};

// Parses YAML, applies defaults (noise N(0, 50), red overlay of thickness
// 2, CLIP weight 2.5) and validates, including that every referenced path
// exists. Throws PlanError naming the field (and line when known).
ExperimentPlan parse_plan(std::string_view yaml_text, const std::filesystem::path& base_dir);
ExperimentPlan load_plan(const std::filesystem::path& path);

// Degradation seed for one image: a hash of (plan seed, image id).
std::uint64_t image_seed(std::uint64_t plan_seed, std::string_view image_id);

}  // namespace detvlm::harness
