#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace detvlm::prompting {

enum class TaskKind { CountAircraft, RouteStatus, Caption };

enum class ImageState { Raw, Degraded };

struct GroundingCondition {
  ImageState image_state = ImageState::Raw;
  bool boxes = false;
  friend auto operator<=>(const GroundingCondition&, const GroundingCondition&) = default;
};

inline constexpr std::array<TaskKind, 3> kAllTasks{TaskKind::CountAircraft, TaskKind::RouteStatus, TaskKind::Caption};
inline constexpr std::array<GroundingCondition, 4> kAllConditions{
    GroundingCondition{ImageState::Raw, false}, GroundingCondition{ImageState::Degraded, false},
    GroundingCondition{ImageState::Raw, true}, GroundingCondition{ImageState::Degraded, true}};

// Short names used in plans, the CLI and report files:
// tasks "count", "route", "caption"; conditions "raw", "degraded",
// "raw+boxes", "degraded+boxes".
std::string_view to_string(TaskKind task);
std::string_view to_string(const GroundingCondition& condition);
TaskKind parse_task(std::string_view name);
GroundingCondition parse_condition(std::string_view name);

// Row labels as they appear in the MAE table, e.g. "Raw + bounding boxes".
std::string_view display_name(const GroundingCondition& condition);

// Per-(task, boxes) template overrides. Templates may use `{base}` (the
// task question) and `{grounding}` (the detector hint sentence). Keys in the
// override file are "<task>.plain" and "<task>.boxes", one
// `key = template` per line; blank lines and lines starting with '#' are
// skipped.
class TemplateSet {
 public:
  void set(TaskKind task, bool boxes, std::string templ);
  const std::string* find(TaskKind task, bool boxes) const;
  bool empty() const noexcept { return templates_.empty(); }

  // Throws TemplateError for unknown keys or placeholders, IoError if the
  // file cannot be read.
  static TemplateSet parse(std::string_view text);
  static TemplateSet load(const std::filesystem::path& path);

 private:
  std::map<std::pair<TaskKind, bool>, std::string> templates_;
};

struct RenderedPrompt {
  std::string text;
  TaskKind task = TaskKind::CountAircraft;
  GroundingCondition condition;
};

// The question for each task and the hint sentence appended when boxes are
// drawn. Degradation never changes the wording.
std::string_view base_question(TaskKind task);
std::string_view grounding_hint(TaskKind task);

RenderedPrompt build_prompt(TaskKind task, const GroundingCondition& condition,
                            const TemplateSet* overrides = nullptr);

}  // namespace detvlm::prompting
