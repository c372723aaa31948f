#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detvlm/harness/plan.hpp"
#include "detvlm/harness/runner.hpp"
#include "detvlm/metrics/metrics.hpp"

namespace detvlm::harness {

struct ImprovementRow {
  std::string label;  // e.g. "Improvement (Raw to Raw + bounding boxes)"
  prompting::GroundingCondition from;
  prompting::GroundingCondition to;
  std::vector<std::optional<double>> cells;  // per backend; empty = "-"
};

struct LatencySummary {
  std::size_t requests = 0;
  std::optional<double> mean_ms;
  std::optional<double> p95_ms;
};

// Table layouts of the MAE and CLIPScore summaries.
struct ReportTables {
  std::vector<std::string> backends;
  std::vector<prompting::GroundingCondition> conditions;
  std::vector<std::vector<metrics::MaeResult>> mae;  // [condition][backend]
  std::vector<ImprovementRow> improvements;
  std::optional<double> average_improvement;

  std::vector<std::optional<double>> clip_raw;    // per backend
  std::vector<std::optional<double>> clip_boxes;  // per backend
  std::vector<std::optional<double>> clip_gain;   // per backend, percent
  std::optional<double> clip_average_gain;

  std::vector<LatencySummary> latency;  // per backend
};

// Aggregates records from one plan. Count records missing a ground truth
// are left out of MAE.
ReportTables build_report(std::span<const RunRecord> records, const ExperimentPlan& plan);

// Fills improvement rows, averages and CLIP gains from already populated
// mae / clip cells.
void derive_summaries(ReportTables& tables);

std::string render_markdown(const ReportTables& tables);

// Writes report.json, mae.csv, clipscore.csv, latency.csv and report.md.
// Output is a pure function of `tables`. Throws IoError.
void emit_report(const ReportTables& tables, const std::filesystem::path& output_dir);

// records.jsonl, one RunRecord per line.
void emit_records(std::span<const RunRecord> records, const std::filesystem::path& output_dir);

}  // namespace detvlm::harness
