#include <gtest/gtest.h>

#include <set>

#include "detvlm/errors.hpp"
#include "detvlm/prompting/prompt.hpp"

using namespace detvlm;
using namespace detvlm::prompting;

TEST(Prompt, ExactWording) {
  EXPECT_EQ(build_prompt(TaskKind::CountAircraft, {ImageState::Raw, false}).text,
            "How many aircraft are there in this picture?");
  EXPECT_EQ(build_prompt(TaskKind::CountAircraft, {ImageState::Raw, true}).text,
            "How many aircraft are there in this picture? Use the aircraft detected by YOLO indicated by the "
            "bounding boxes to aid your assessment.");
  EXPECT_EQ(build_prompt(TaskKind::RouteStatus, {ImageState::Raw, true}).text,
            "Which route is unobstructed? Use the vehicles detected by YOLO indicated by the bounding boxes to aid "
            "your assessment.");
  EXPECT_EQ(build_prompt(TaskKind::Caption, {ImageState::Raw, false}).text, "What does the image depict?");
  EXPECT_EQ(build_prompt(TaskKind::Caption, {ImageState::Raw, true}).text,
            "What does the image depict? Use the aircraft detected by YOLO indicated by the bounding boxes to aid "
            "your description.");
}

TEST(Prompt, DegradationNeverChangesWording) {
  for (auto task : kAllTasks) {
    for (bool boxes : {false, true}) {
      EXPECT_EQ(build_prompt(task, {ImageState::Raw, boxes}).text, build_prompt(task, {ImageState::Degraded, boxes}).text);
    }
  }
}

TEST(Prompt, BoxesOnlyAppendAHint) {
  for (auto task : kAllTasks) {
    const auto plain = build_prompt(task, {ImageState::Raw, false}).text;
    const auto boxed = build_prompt(task, {ImageState::Raw, true}).text;
    EXPECT_EQ(boxed.rfind(plain, 0), 0u);
    EXPECT_GT(boxed.size(), plain.size());
  }
}

TEST(Prompt, NamesRoundTrip) {
  std::set<std::string_view> seen;
  for (const auto& c : kAllConditions) {
    EXPECT_EQ(parse_condition(to_string(c)), c);
    seen.insert(display_name(c));
  }
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_EQ(display_name({ImageState::Raw, true}), "Raw + bounding boxes");
  for (auto t : kAllTasks) EXPECT_EQ(parse_task(to_string(t)), t);
  EXPECT_THROW(parse_task("segment"), std::invalid_argument);
  EXPECT_THROW(parse_condition("noisy"), std::invalid_argument);
}

TEST(Templates, OverridesApply) {
  const auto set = TemplateSet::parse(
      "# comment\n\ncount.plain = Count please. {base}\ncount.boxes = {base} Boxes mark planes. {grounding}\n");
  EXPECT_EQ(build_prompt(TaskKind::CountAircraft, {ImageState::Raw, false}, &set).text,
            "Count please. How many aircraft are there in this picture?");
  EXPECT_NE(build_prompt(TaskKind::CountAircraft, {ImageState::Degraded, true}, &set).text.find("Boxes mark planes."),
            std::string::npos);
  EXPECT_EQ(build_prompt(TaskKind::Caption, {ImageState::Raw, false}, &set).text, "What does the image depict?");
}

TEST(Templates, RejectsBadInput) {
  EXPECT_THROW(TemplateSet::parse("count.plain = {question}\n"), TemplateError);
  EXPECT_THROW(TemplateSet::parse("count.extra = x\n"), TemplateError);
  EXPECT_THROW(TemplateSet::parse("dance.plain = x\n"), TemplateError);
  EXPECT_THROW(TemplateSet::parse("no equals sign\n"), TemplateError);
}
