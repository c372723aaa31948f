#include <gtest/gtest.h>

#include <set>

#include "detvlm/errors.hpp"
#include "detvlm/harness/plan.hpp"
#include "detvlm/harness/report.hpp"
#include "detvlm/harness/runner.hpp"
#include "detvlm/metrics/metrics.hpp"
#include "support/fixtures.hpp"

using namespace detvlm;
using namespace detvlm::harness;
using prompting::GroundingCondition;
using prompting::ImageState;

namespace fs = std::filesystem;

namespace {

std::string synthetic_backend(const std::string& name, int offset, double refusal = 0.0) {
  return "  - name: " + name + "\n    kind: mock-synthetic\n    synthetic:\n      error_offset: " +
         std::to_string(offset) + "\n      refusal_rate: " + std::to_string(refusal) + "\n      seed: 3\n";
}

struct Workspace {
  testsupport::TempDir dir;
  testsupport::Dataset ds = testsupport::make_dataset(dir.path(), 10);

  ExperimentPlan plan(const std::string& backends, const std::string& extra = "") {
    return parse_plan(testsupport::plan_yaml(ds, backends, extra), dir.path());
  }
};

std::string plan_error(const std::string& yaml, const fs::path& base) {
  try {
    parse_plan(yaml, base);
  } catch (const PlanError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Plan, DefaultsApplied) {
  Workspace ws;
  const auto p = ws.plan(synthetic_backend("m", 0));
  EXPECT_EQ(p.noise.std_dev, 50.0);
  EXPECT_EQ(p.noise.mean, 0.0);
  EXPECT_EQ(p.overlay.color, (imagery::Rgb{255, 0, 0}));
  EXPECT_EQ(p.overlay.thickness, 2);
  EXPECT_EQ(p.clip.weight, 2.5);
  EXPECT_EQ(p.max_concurrency, 1);
  EXPECT_FALSE(p.detect_on_degraded);
  EXPECT_EQ(p.detection_source.kind, detection::SourceKind::LabelDirectory);
  EXPECT_EQ(p.cache_path, ws.dir.path() / "cache.jsonl");
  EXPECT_EQ(p.conditions.size(), 4u);
}

TEST(Plan, ValidationErrorsNameTheField) {
  Workspace ws;
  const auto base = testsupport::plan_yaml(ws.ds, synthetic_backend("m", 0));
  EXPECT_NE(plan_error(testsupport::plan_yaml(ws.ds, "  []\n"), ws.dir.path()).find("backends"), std::string::npos);
  auto missing = base;
  missing.replace(missing.find(ws.ds.labels.string()), ws.ds.labels.string().size(), "/no/such/labels");
  EXPECT_NE(plan_error(missing, ws.dir.path()).find("labels_dir"), std::string::npos);
  EXPECT_NE(plan_error(base + "max_concurrency: 0\n", ws.dir.path()).find("max_concurrency"), std::string::npos);
  EXPECT_NE(plan_error(base + "noise:\n  std_dev: -1\n", ws.dir.path()).find("noise"), std::string::npos);
  auto wrong_schema = base;
  wrong_schema.replace(wrong_schema.find("schema: 1"), 9, "schema: 2");
  EXPECT_NE(plan_error(wrong_schema, ws.dir.path()).find("schema"), std::string::npos);
  EXPECT_NE(plan_error("tasks: [count\n", ws.dir.path()).find("line"), std::string::npos);
  const auto dup = testsupport::plan_yaml(ws.ds, synthetic_backend("m", 0) + synthetic_backend("m", 1));
  EXPECT_NE(plan_error(dup, ws.dir.path()).find("duplicate"), std::string::npos);
  const auto bad_kind = "dataset_root: " + ws.ds.images.string() + "\nlabels_dir: " + ws.ds.labels.string() +
                        "\ntasks: [count]\nconditions: [raw]\nbackends:\n  - name: x\n    kind: telepathy\n";
  const auto msg = plan_error(bad_kind, ws.dir.path());
  EXPECT_NE(msg.find("backends[0].kind"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
}

TEST(Plan, LoadFromFileResolvesRelativePaths) {
  Workspace ws;
  testsupport::write_text(ws.dir / "plans/p.yaml",
                          "dataset_root: ../images\nlabels_dir: ../labels\ntasks: [count]\nconditions: [raw]\n"
                          "backends:\n" + synthetic_backend("m", 0) + "output_dir: out\n");
  const auto p = load_plan(ws.dir / "plans/p.yaml");
  EXPECT_EQ(fs::weakly_canonical(p.dataset_root), fs::weakly_canonical(ws.ds.images));
  EXPECT_EQ(p.output_dir, ws.dir.path() / "plans/out");
  EXPECT_THROW(load_plan(ws.dir / "plans/none.yaml"), PlanError);
}

TEST(Plan, ImageSeedsDifferPerImage) {
  EXPECT_EQ(image_seed(1, "a"), image_seed(1, "a"));
  EXPECT_NE(image_seed(1, "a"), image_seed(1, "b"));
  EXPECT_NE(image_seed(1, "a"), image_seed(2, "a"));
}

TEST(Jobs, CartesianProductInStableOrder) {
  Workspace ws;
  auto p = ws.plan(synthetic_backend("a", 0) + synthetic_backend("b", 0) + synthetic_backend("c", 0));
  p.image_glob = "img_0[01].png";
  const auto jobs = enumerate_jobs(p);
  ASSERT_EQ(jobs.size(), 2u * 1u * 4u * 3u);
  std::set<std::tuple<std::string, int, std::string, std::string>> unique;
  for (const auto& j : jobs) {
    unique.insert({j.image_id, static_cast<int>(j.task), std::string(prompting::to_string(j.condition)), j.backend});
  }
  EXPECT_EQ(unique.size(), jobs.size());
  const auto again = enumerate_jobs(p);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    EXPECT_EQ(jobs[i].image_id, again[i].image_id);
    EXPECT_EQ(jobs[i].condition, again[i].condition);
    EXPECT_EQ(jobs[i].backend, again[i].backend);
  }
  EXPECT_EQ(jobs.front().image_id, "img_00");
  EXPECT_EQ(jobs.back().image_id, "img_01");
  p.image_glob = "*.bmp";
  EXPECT_THROW(enumerate_jobs(p), PlanError);
}

TEST(Execute, OffsetOracleHoldsForEveryCondition) {
  Workspace ws;
  for (int offset : {0, 2, -1}) {
    const auto p = ws.plan(synthetic_backend("m", offset), "cache_path: cache" + std::to_string(offset + 5) + ".jsonl\n");
    Runner runner(p, {.clock = nullptr});
    const auto records = runner.execute();
    ASSERT_EQ(records.size(), 40u);
    const auto t = build_report(records, p);
    for (const auto& row : t.mae) {
      ASSERT_TRUE(row[0].mae.has_value());
      EXPECT_EQ(*row[0].mae, std::abs(offset));
    }
  }
}

TEST(Execute, ConcurrencyDoesNotChangeResults) {
  Workspace ws;
  const auto serial_plan = ws.plan(synthetic_backend("m", 1), "cache_path: s.jsonl\n");
  const auto pooled_plan = ws.plan(synthetic_backend("m", 1), "cache_path: p.jsonl\nmax_concurrency: 4\n");
  const auto a = Runner(serial_plan).execute();
  const auto b = Runner(pooled_plan).execute();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].exchange.request_digest, b[i].exchange.request_digest);
    EXPECT_EQ(a[i].parsed, b[i].parsed);
  }
}

TEST(Execute, DegradedAndBoxedImagesDiffer) {
  Workspace ws;
  const auto p = ws.plan(synthetic_backend("m", 0));
  auto jobs = enumerate_jobs(p);
  Runner runner(p);
  const auto records = runner.execute(std::span(jobs).first(4));
  std::set<std::string> digests;
  for (const auto& r : records) digests.insert(r.exchange.request_digest);
  EXPECT_EQ(digests.size(), 4u);
}

TEST(Execute, CorruptImageIsIsolated) {
  Workspace ws;
  testsupport::write_text(ws.ds.images / "img_03.png", "not a png");
  const auto p = ws.plan(synthetic_backend("m", 0));
  const auto records = Runner(p).execute();
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.exchange.ok()) continue;
    ++failed;
    EXPECT_EQ(r.job.image_id, "img_03");
    EXPECT_EQ(r.exchange.failure->category, gateway::FailureCategory::InputError);
  }
  EXPECT_EQ(failed, 4u);
  EXPECT_TRUE(has_failures(records));
  EXPECT_EQ(*build_report(records, p).mae[0][0].mae, 0.0);
}

TEST(Execute, MissingDetectionsOnlyFailBoxedConditions) {
  Workspace ws;
  fs::create_directories(ws.dir / "dets");
  const auto p = ws.plan(synthetic_backend("m", 0), "detection_source:\n  kind: label-directory\n  location: dets\n");
  for (const auto& r : Runner(p).execute()) {
    EXPECT_EQ(r.exchange.ok(), !r.job.condition.boxes);
  }
}

TEST(Execute, CaptionsGetClipScoresOnRawConditionsOnly) {
  Workspace ws;
  auto yaml = testsupport::plan_yaml(ws.ds, synthetic_backend("m", 0));
  yaml.replace(yaml.find("tasks: [count]"), 14, "tasks: [caption, route]");
  const auto p = parse_plan(yaml, ws.dir.path());
  const auto records = Runner(p).execute();
  for (const auto& r : records) {
    const bool expect_clip =
        r.job.task == prompting::TaskKind::Caption && r.job.condition.image_state == ImageState::Raw;
    EXPECT_EQ(r.clip.has_value(), expect_clip);
    if (r.job.task == prompting::TaskKind::RouteStatus) {
      EXPECT_TRUE(std::holds_alternative<parsing::RouteAssessment>(r.parsed));
    }
  }
  const auto t = build_report(records, p);
  EXPECT_TRUE(t.clip_raw[0].has_value());
  EXPECT_TRUE(t.clip_gain[0].has_value());
}

TEST(Execute, OfflineReplayNeverDispatches) {
  Workspace ws;
  const auto p = ws.plan(synthetic_backend("m", 0));
  Runner offline(p, {.offline = true});
  const auto records = offline.execute();
  EXPECT_EQ(offline.dispatch_count(), 0u);
  for (const auto& r : records) EXPECT_EQ(r.exchange.failure->category, gateway::FailureCategory::CacheMiss);
}

TEST(Report, ReferenceCellsReproduceImprovementRow) {
  ReportTables t;
  t.backends = {"LLaVA", "ChatGPT", "Gemini"};
  t.conditions = {prompting::kAllConditions.begin(), prompting::kAllConditions.end()};
  const auto cell = [](std::optional<double> v) {
    metrics::MaeResult r;
    r.mae = v;
    return r;
  };
  t.mae = {{cell({}), cell(8.45), cell(35)},
           {cell({}), cell(17.27), cell(103.81)},
           {cell(26.09), cell(8.27), cell(16.27)},
           {cell(26.18), cell(8.54), cell(10.72)}};
  t.clip_raw = {31.88, 31.88, 32.39};
  t.clip_boxes = {34.09, 34.09, 33.90};
  t.latency.resize(3);
  derive_summaries(t);
  ASSERT_EQ(t.improvements.size(), 2u);
  EXPECT_EQ(t.improvements[0].label, "Improvement (Raw to Raw + bounding boxes)");
  EXPECT_FALSE(t.improvements[0].cells[0]);
  EXPECT_NEAR(*t.improvements[0].cells[1], 2.13, 0.01);
  EXPECT_NEAR(*t.improvements[0].cells[2], 53.51, 0.01);
  // Unrounded this is 50.5501; the displayed cell 50.55 sits on the tolerance edge.
  EXPECT_NEAR(metrics::round_half_away(*t.improvements[1].cells[1]), 50.54, 0.01 + 1e-9);
  EXPECT_NEAR(*t.improvements[1].cells[2], 89.67, 0.01);
  EXPECT_NEAR(*t.average_improvement, 48.96, 0.01);
  EXPECT_NEAR(*t.clip_average_gain, 6.17, 0.01);

  const auto md = render_markdown(t);
  EXPECT_NE(md.find("| Raw + bounding boxes | 26.09 | 8.27 | 16.27 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Raw | Undefined | 8.45 | 35.00 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Improvement (Raw to Raw + bounding boxes) | - | 2.13% | 53.51% |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Average Improvement Across Scenarios | 48.97% |"), std::string::npos) << md;
  EXPECT_NE(md.find("| Improvement (%) | 6.93% | 6.93% | 4.66% |"), std::string::npos) << md;
}

TEST(Report, EmitIsByteStableAndHandlesEmptyRecords) {
  Workspace ws;
  const auto p = ws.plan(synthetic_backend("m", 0));
  const auto t = build_report({}, p);
  EXPECT_FALSE(t.mae[0][0].defined());
  EXPECT_FALSE(t.average_improvement);
  emit_report(t, ws.dir / "a");
  emit_report(t, ws.dir / "b");
  for (const auto* name : {"report.json", "mae.csv", "clipscore.csv", "latency.csv", "report.md"}) {
    const auto a = testsupport::read_text(ws.dir / "a" / name);
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, testsupport::read_text(ws.dir / "b" / name)) << name;
  }
  EXPECT_EQ(testsupport::read_text(ws.dir / "a/mae.csv").substr(0, 12), "condition,m\n");
  EXPECT_TRUE(nlohmann::json::parse(testsupport::read_text(ws.dir / "a/report.json")).is_object());
}

TEST(Report, RefusingBackendYieldsUndefinedAndDash) {
  Workspace ws;
  const auto p = ws.plan(synthetic_backend("ok", 0) + synthetic_backend("shy", 0, 1.0));
  const auto t = build_report(Runner(p).execute(), p);
  for (const auto& row : t.mae) {
    EXPECT_TRUE(row[0].defined());
    EXPECT_FALSE(row[1].defined());
  }
  for (const auto& imp : t.improvements) EXPECT_FALSE(imp.cells[1]);
  EXPECT_NE(render_markdown(t).find("| Raw | 0.00 | Undefined |"), std::string::npos);
}
