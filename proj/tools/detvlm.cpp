#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <sstream>

#include "detvlm/detection/evaluation.hpp"
#include "detvlm/errors.hpp"
#include "detvlm/harness/plan.hpp"
#include "detvlm/harness/report.hpp"
#include "detvlm/harness/runner.hpp"
#include "detvlm/imagery/degrade.hpp"
#include "detvlm/imagery/io.hpp"
#include "detvlm/imagery/overlay.hpp"
#include "detvlm/parsing/answer.hpp"
#include "detvlm/prompting/prompt.hpp"

namespace fs = std::filesystem;
using namespace detvlm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitPlan = 2;
constexpr int kExitRuntime = 3;

imagery::ImageFormat format_for(const fs::path& p) {
  auto ext = p.extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  return imagery::parse_image_format(ext);
}

int cmd_degrade(const std::string& in, const std::string& out, double mean, double std_dev, std::uint64_t seed) {
  imagery::NoiseSpec spec{mean, std_dev, seed};
  spec.validate();
  imagery::save_image(imagery::degrade_gaussian(imagery::load_image(in), spec), out, format_for(out));
  return 0;
}

int cmd_overlay(const std::string& image, const std::string& labels, const std::string& out,
                const std::vector<int>& color, int thickness, double min_conf) {
  imagery::OverlayStyle style;
  if (!color.empty()) {
    if (color.size() != 3) throw std::invalid_argument("--color takes three values r,g,b");
    for (int c : color) {
      if (c < 0 || c > 255) throw std::invalid_argument("--color components must be 0-255");
    }
    style.color = {static_cast<std::uint8_t>(color[0]), static_cast<std::uint8_t>(color[1]),
                   static_cast<std::uint8_t>(color[2])};
  }
  style.thickness = thickness;
  style.validate();
  const auto img = imagery::load_image(image);
  std::vector<imagery::PixelRect> rects;
  for (const auto& d : detection::parse_any_labels(detection::read_text_file(labels))) {
    if (d.confidence >= min_conf) rects.push_back(detection::to_pixel_rect(d.box, img.width(), img.height()));
  }
  imagery::save_image(imagery::render_overlays(img, rects, style), out, format_for(out));
  return 0;
}

int cmd_detect_eval(const std::string& dets_dir, const std::string& gt_dir, double iou) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(gt_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<detection::ImageEvaluation> images;
  for (const auto& gt : files) {
    detection::ImageEvaluation ev;
    ev.ground_truth = detection::parse_ground_truth(detection::read_text_file(gt.string()));
    const auto det = fs::path(dets_dir) / gt.filename();
    if (fs::exists(det)) ev.detections = detection::parse_any_labels(detection::read_text_file(det.string()));
    images.push_back(std::move(ev));
  }
  const auto report = detection::evaluate_dataset(images, iou);
  for (const auto& [cls, r] : report.per_class) {
    std::printf("class %d: ground_truth %zu, AP %.6f\n", cls, r.ground_truth, r.average_precision);
    for (const auto& p : r.curve) std::printf("  recall %.6f precision %.6f\n", p.recall, p.precision);
  }
  std::printf("mAP@%.2f %.6f\n", iou, report.mean_average_precision);
  return 0;
}

int cmd_prompt(const std::string& task, const std::string& condition, const std::string& overrides) {
  prompting::TemplateSet templates;
  if (!overrides.empty()) templates = prompting::TemplateSet::load(overrides);
  const auto p = prompting::build_prompt(prompting::parse_task(task), prompting::parse_condition(condition),
                                         templates.empty() ? nullptr : &templates);
  std::cout << p.text << '\n';
  return 0;
}

int cmd_query(const std::string& plan_path, const std::string& image, const std::string& task,
              const std::string& condition, const std::string& backend) {
  auto plan = harness::load_plan(plan_path);
  if (!plan.find_backend(backend)) throw PlanError("backend", "no backend named '" + backend + "'");
  harness::Job job{fs::path(image).stem().string(), fs::absolute(image), prompting::parse_task(task),
                   prompting::parse_condition(condition), backend};
  harness::Runner runner(std::move(plan));
  const auto records = runner.execute(std::span(&job, 1));
  const auto& r = records.front();
  if (r.exchange.ok()) {
    std::cout << "response: " << *r.exchange.response << '\n';
  } else {
    std::cout << "failure: " << gateway::to_string(r.exchange.failure->category) << ": "
              << r.exchange.failure->detail << '\n';
  }
  std::cout << parsing::to_key_value(r.parsed);
  return r.exchange.ok() ? 0 : kExitRuntime;
}

int cmd_run(const std::string& plan_path, bool offline) {
  harness::Runner runner(harness::load_plan(plan_path), {.offline = offline});
  const auto records = runner.execute();
  const auto& plan = runner.plan();
  emit_records(records, plan.output_dir);
  emit_report(build_report(records, plan), plan.output_dir);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.exchange.ok() ? 0 : 1;
  std::cerr << records.size() << " jobs, " << failed << " failed, " << runner.dispatch_count()
            << " dispatches; report in " << plan.output_dir.string() << '\n';
  return failed ? kExitRuntime : 0;
}

int cmd_parse(const std::string& task) {
  const auto kind = prompting::parse_task(task);
  const std::string text{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::cout << parsing::to_key_value(parsing::classify_text(text, kind));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detector-grounded VLM evaluation toolkit"};
  app.require_subcommand(1);

  std::string a, b, c, d, e;
  double mean = 0.0, std_dev = 50.0, iou = 0.5, min_conf = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> color;
  int thickness = 2;
  std::string overrides;

  auto* degrade = app.add_subcommand("degrade", "Add seeded Gaussian noise to an image");
  degrade->add_option("in", a, "Input image")->required();
  degrade->add_option("out", b, "Output image (.png or .jpg)")->required();
  degrade->add_option("--mean", mean, "Noise mean");
  degrade->add_option("--std", std_dev, "Noise standard deviation");
  degrade->add_option("--seed", seed, "Noise seed");

  auto* overlay = app.add_subcommand("overlay", "Draw label boxes onto an image");
  overlay->add_option("image", a, "Input image")->required();
  overlay->add_option("labels", b, "Label file")->required();
  overlay->add_option("out", c, "Output image")->required();
  overlay->add_option("--color", color, "Box color r,g,b")->delimiter(',');
  overlay->add_option("--thickness", thickness, "Line thickness in pixels");
  overlay->add_option("--min-confidence", min_conf, "Skip detections below this confidence");

  auto* eval = app.add_subcommand("detect-eval", "PR points and AP for detection label files");
  eval->add_option("dets-dir", a, "Detection labels")->required();
  eval->add_option("gt-dir", b, "Ground-truth labels")->required();
  eval->add_option("--iou", iou, "IoU threshold");

  auto* prompt = app.add_subcommand("prompt", "Print the prompt for a task and condition");
  prompt->add_option("task", a, "count | route | caption")->required();
  prompt->add_option("condition", b, "raw | degraded | raw+boxes | degraded+boxes")->required();
  prompt->add_option("--overrides", overrides, "Template override file");

  auto* query = app.add_subcommand("query", "Send one image through one backend of a plan");
  query->add_option("plan", a, "Plan file")->required();
  query->add_option("image", b, "Image file")->required();
  query->add_option("task", c, "Task")->required();
  query->add_option("condition", d, "Condition")->required();
  query->add_option("backend", e, "Backend name")->required();

  auto* run = app.add_subcommand("run", "Execute a plan and write the report");
  run->add_option("plan", a, "Plan file")->required();

  auto* report = app.add_subcommand("report", "Rebuild the report from the cache only");
  report->add_option("plan", a, "Plan file")->required();

  auto* parse = app.add_subcommand("parse", "Parse a response read from stdin");
  parse->add_option("task", a, "count | route | caption")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*degrade) return cmd_degrade(a, b, mean, std_dev, seed);
    if (*overlay) return cmd_overlay(a, b, c, color, thickness, min_conf);
    if (*eval) return cmd_detect_eval(a, b, iou);
    if (*prompt) return cmd_prompt(a, b, overrides);
    if (*query) return cmd_query(a, b, c, d, e);
    if (*run) return cmd_run(a, false);
    if (*report) return cmd_run(a, true);
    if (*parse) return cmd_parse(a);
  } catch (const PlanError& err) {
    std::cerr << "plan error: " << err.what() << '\n';
    return kExitPlan;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid argument: " << err.what() << '\n';
    return kExitPlan;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
