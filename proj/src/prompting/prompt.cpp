#include "detvlm/prompting/prompt.hpp"

#include <regex>
#include <stdexcept>

#include "detvlm/detection/labels.hpp"
#include "detvlm/errors.hpp"

namespace detvlm::prompting {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_placeholders(const std::string& templ) {
  static const std::regex kPlaceholder(R"(\{([^{}]*)\})");
  for (std::sregex_iterator it(templ.begin(), templ.end(), kPlaceholder), end; it != end; ++it) {
    const auto name = (*it)[1].str();
    if (name != "base" && name != "grounding") throw TemplateError("unknown placeholder '{" + name + "}'");
  }
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::CountAircraft: return "count";
    case TaskKind::RouteStatus: return "route";
    case TaskKind::Caption: return "caption";
  }
  return "?";
}

std::string_view to_string(const GroundingCondition& c) {
  if (c.image_state == ImageState::Raw) return c.boxes ? "raw+boxes" : "raw";
  return c.boxes ? "degraded+boxes" : "degraded";
}

std::string_view display_name(const GroundingCondition& c) {
  if (c.image_state == ImageState::Raw) return c.boxes ? "Raw + bounding boxes" : "Raw";
  return c.boxes ? "Degraded + bounding boxes" : "Degraded";
}

TaskKind parse_task(std::string_view name) {
  for (auto t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) + "' (expected count, route or caption)");
}

GroundingCondition parse_condition(std::string_view name) {
  for (const auto& c : kAllConditions) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown condition '" + std::string(name) +
                              "' (expected raw, degraded, raw+boxes or degraded+boxes)");
}

void TemplateSet::set(TaskKind task, bool boxes, std::string templ) {
  check_placeholders(templ);
  templates_[{task, boxes}] = std::move(templ);
}

const std::string* TemplateSet::find(TaskKind task, bool boxes) const {
  auto it = templates_.find({task, boxes});
  return it == templates_.end() ? nullptr : &it->second;
}

TemplateSet TemplateSet::parse(std::string_view text) {
  TemplateSet set;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw TemplateError("line " + std::to_string(line_no) + ": expected 'key = template'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string_view::npos) throw TemplateError("line " + std::to_string(line_no) + ": bad key");
    const auto variant = key.substr(dot + 1);
    if (variant != "plain" && variant != "boxes") {
      throw TemplateError("line " + std::to_string(line_no) + ": key suffix must be .plain or .boxes");
    }
    TaskKind task;
    try {
      task = parse_task(key.substr(0, dot));
    } catch (const std::invalid_argument& e) {
      throw TemplateError("line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      set.set(task, variant == "boxes", std::string(value));
    } catch (const TemplateError& e) {
      throw TemplateError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  return parse(detection::read_text_file(path.string()));
}

std::string_view base_question(TaskKind task) {
  switch (task) {
    case TaskKind::CountAircraft: return "How many aircraft are there in this picture?";
    case TaskKind::RouteStatus: return "Which route is unobstructed?";
    case TaskKind::Caption: return "What does the image depict?";
  }
  return "";
}

std::string_view grounding_hint(TaskKind task) {
  switch (task) {
    case TaskKind::CountAircraft:
      return "Use the aircraft detected by YOLO indicated by the bounding boxes to aid your assessment.";
    case TaskKind::RouteStatus:
      return "Use the vehicles detected by YOLO indicated by the bounding boxes to aid your assessment.";
    case TaskKind::Caption:
      return "Use the aircraft detected by YOLO indicated by the bounding boxes to aid your description.";
  }
  return "";
}

RenderedPrompt build_prompt(TaskKind task, const GroundingCondition& condition, const TemplateSet* overrides) {
  RenderedPrompt out{{}, task, condition};
  const std::string* templ = overrides ? overrides->find(task, condition.boxes) : nullptr;
  if (templ) {
    auto text = replace_all(*templ, "{base}", base_question(task));
    out.text = replace_all(std::move(text), "{grounding}", grounding_hint(task));
  } else if (condition.boxes) {
    out.text = std::string(base_question(task)) + " " + std::string(grounding_hint(task));
  } else {
    out.text = std::string(base_question(task));
  }
  if (out.text.empty()) throw TemplateError("rendered prompt is empty");
  return out;
}

}  // namespace detvlm::prompting
