#include "detvlm/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "detvlm/errors.hpp"

namespace detvlm::harness {
namespace fs = std::filesystem;
using prompting::GroundingCondition;
using prompting::ImageState;

namespace {

constexpr GroundingCondition kRaw{ImageState::Raw, false};
constexpr GroundingCondition kRawBoxes{ImageState::Raw, true};
constexpr GroundingCondition kDegraded{ImageState::Degraded, false};
constexpr GroundingCondition kDegradedBoxes{ImageState::Degraded, true};

constexpr std::string_view kUndefined = "Undefined";
constexpr std::string_view kSkipped = "-";

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", metrics::round_half_away(v, 2));
  // Avoid "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

std::string pct(const std::optional<double>& v) { return v ? fixed2(*v) + "%" : std::string(kSkipped); }

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Nearest-rank percentile on sorted data.
double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

bool reached_backend(const gateway::VlmExchange& ex) {
  if (ex.ok()) return true;
  const auto c = ex.failure->category;
  return c != gateway::FailureCategory::InputError && c != gateway::FailureCategory::CacheMiss;
}

std::optional<double> ratio_cell(const std::optional<double>& base, const std::optional<double>& enhanced,
                                 double (*fn)(double, double)) {
  if (!base || !enhanced || !(*base > 0.0)) return std::nullopt;
  return fn(*base, *enhanced);
}

// Averages are taken over the cells as displayed (2 dp), so they agree with
// a reader averaging the printed row.
std::optional<double> average_displayed(const std::vector<std::optional<double>>& cells) {
  std::vector<double> shown;
  for (const auto& c : cells) {
    if (c) shown.push_back(metrics::round_half_away(*c, 2));
  }
  return mean_of(shown);
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

ReportTables build_report(std::span<const RunRecord> records, const ExperimentPlan& plan) {
  ReportTables t;
  for (const auto& b : plan.backends) t.backends.push_back(b.name);
  t.conditions = plan.conditions;

  const auto backend_index = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(t.backends.begin(), t.backends.end(), name);
    if (it == t.backends.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.backends.begin());
  };
  const auto cond_index = [&](const GroundingCondition& c) -> std::optional<std::size_t> {
    auto it = std::find(t.conditions.begin(), t.conditions.end(), c);
    if (it == t.conditions.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.conditions.begin());
  };

  const auto nb = t.backends.size();
  std::vector<std::vector<std::vector<metrics::CountRecord>>> counts(
      t.conditions.size(), std::vector<std::vector<metrics::CountRecord>>(nb));
  std::vector<std::vector<double>> clip_raw(nb), clip_boxes(nb), latencies(nb);

  for (const auto& r : records) {
    const auto b = backend_index(r.job.backend);
    if (!b) continue;
    if (reached_backend(r.exchange)) latencies[*b].push_back(r.exchange.latency_ms);
    if (r.job.task == prompting::TaskKind::CountAircraft && r.actual_count) {
      if (const auto c = cond_index(r.job.condition)) {
        counts[*c][*b].push_back({r.job.image_id, r.parsed, *r.actual_count});
      }
    }
    if (r.job.task == prompting::TaskKind::Caption && r.clip) {
      if (r.job.condition == kRaw) clip_raw[*b].push_back(*r.clip);
      if (r.job.condition == kRawBoxes) clip_boxes[*b].push_back(*r.clip);
    }
  }

  t.mae.resize(t.conditions.size());
  for (std::size_t c = 0; c < t.conditions.size(); ++c) {
    for (std::size_t b = 0; b < nb; ++b) t.mae[c].push_back(metrics::mae(counts[c][b]));
  }
  for (std::size_t b = 0; b < nb; ++b) {
    t.clip_raw.push_back(mean_of(clip_raw[b]));
    t.clip_boxes.push_back(mean_of(clip_boxes[b]));
    LatencySummary lat;
    lat.requests = latencies[b].size();
    if (!latencies[b].empty()) {
      auto sorted = latencies[b];
      std::sort(sorted.begin(), sorted.end());
      lat.mean_ms = mean_of(sorted);
      lat.p95_ms = nearest_rank(sorted, 95.0);
    }
    t.latency.push_back(lat);
  }
  derive_summaries(t);
  return t;
}

void derive_summaries(ReportTables& t) {
  const auto nb = t.backends.size();
  const auto cell = [&](const GroundingCondition& c, std::size_t b) -> std::optional<double> {
    auto it = std::find(t.conditions.begin(), t.conditions.end(), c);
    if (it == t.conditions.end()) return std::nullopt;
    const auto& row = t.mae[static_cast<std::size_t>(it - t.conditions.begin())];
    return b < row.size() ? row[b].mae : std::nullopt;
  };
  const auto has = [&](const GroundingCondition& c) {
    return std::find(t.conditions.begin(), t.conditions.end(), c) != t.conditions.end();
  };

  t.improvements.clear();
  std::vector<std::optional<double>> all_cells;
  const std::pair<GroundingCondition, GroundingCondition> pairs[] = {{kRaw, kRawBoxes}, {kDegraded, kDegradedBoxes}};
  for (const auto& [from, to] : pairs) {
    if (!has(from) || !has(to)) continue;
    ImprovementRow row;
    row.label = "Improvement (" + std::string(prompting::display_name(from)) + " to " +
                std::string(prompting::display_name(to)) + ")";
    row.from = from;
    row.to = to;
    for (std::size_t b = 0; b < nb; ++b) {
      row.cells.push_back(ratio_cell(cell(from, b), cell(to, b), &metrics::improvement_pct));
      all_cells.push_back(row.cells.back());
    }
    t.improvements.push_back(std::move(row));
  }
  t.average_improvement = average_displayed(all_cells);

  t.clip_raw.resize(nb);
  t.clip_boxes.resize(nb);
  t.clip_gain.clear();
  for (std::size_t b = 0; b < nb; ++b) {
    t.clip_gain.push_back(ratio_cell(t.clip_raw[b], t.clip_boxes[b], &metrics::gain_pct));
  }
  t.clip_average_gain = average_displayed(t.clip_gain);
}

std::string render_markdown(const ReportTables& t) {
  std::ostringstream md;
  const auto header = [&] {
    md << "| Data |";
    for (const auto& b : t.backends) md << ' ' << b << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < t.backends.size(); ++i) md << "---|";
    md << '\n';
  };

  md << "# Results\n\n## MAE Summary\n\n";
  header();
  for (std::size_t c = 0; c < t.conditions.size(); ++c) {
    md << "| " << prompting::display_name(t.conditions[c]) << " |";
    for (const auto& r : t.mae[c]) md << ' ' << (r.mae ? fixed2(*r.mae) : std::string(kUndefined)) << " |";
    md << '\n';
  }
  for (const auto& row : t.improvements) {
    md << "| " << row.label << " |";
    for (const auto& v : row.cells) md << ' ' << pct(v) << " |";
    md << '\n';
  }
  md << "| Average Improvement Across Scenarios | " << pct(t.average_improvement) << " |\n\n";

  md << "## CLIPScore Summary\n\n";
  header();
  const auto clip_row = [&](std::string_view label, const std::vector<std::optional<double>>& cells) {
    md << "| " << label << " |";
    for (const auto& v : cells) md << ' ' << (v ? fixed2(*v) : std::string(kSkipped)) << " |";
    md << '\n';
  };
  clip_row(prompting::display_name(kRaw), t.clip_raw);
  clip_row(prompting::display_name(kRawBoxes), t.clip_boxes);
  md << "| Improvement (%) |";
  for (const auto& v : t.clip_gain) md << ' ' << pct(v) << " |";
  md << "\n| Average Improvement Across Models | " << pct(t.clip_average_gain) << " |\n\n";

  md << "## Latency\n\n| Backend | Requests | Mean (ms) | p95 (ms) |\n|---|---|---|---|\n";
  for (std::size_t b = 0; b < t.backends.size(); ++b) {
    const auto& l = t.latency[b];
    md << "| " << t.backends[b] << " | " << l.requests << " | "
       << (l.mean_ms ? fixed2(*l.mean_ms) : std::string(kSkipped)) << " | "
       << (l.p95_ms ? fixed2(*l.p95_ms) : std::string(kSkipped)) << " |\n";
  }
  return md.str();
}

namespace {

nlohmann::json tables_json(const ReportTables& t) {
  nlohmann::json j;
  j["backends"] = t.backends;
  auto conds = nlohmann::json::array();
  for (const auto& c : t.conditions) conds.push_back(prompting::to_string(c));
  j["conditions"] = conds;

  auto mae = nlohmann::json::array();
  for (std::size_t c = 0; c < t.conditions.size(); ++c) {
    auto row = nlohmann::json::array();
    for (const auto& r : t.mae[c]) {
      row.push_back({{"mae", opt(r.mae)}, {"answered", r.n_answered}, {"undefined", r.n_undefined}});
    }
    mae.push_back(row);
  }
  j["mae"] = mae;

  auto imp = nlohmann::json::array();
  for (const auto& row : t.improvements) {
    auto cells = nlohmann::json::array();
    for (const auto& v : row.cells) cells.push_back(opt(v));
    imp.push_back({{"label", row.label},
                   {"from", prompting::to_string(row.from)},
                   {"to", prompting::to_string(row.to)},
                   {"cells", cells}});
  }
  j["improvements"] = imp;
  j["average_improvement"] = opt(t.average_improvement);

  const auto arr = [](const std::vector<std::optional<double>>& v) {
    auto a = nlohmann::json::array();
    for (const auto& x : v) a.push_back(opt(x));
    return a;
  };
  j["clip"] = {{"raw", arr(t.clip_raw)},
               {"raw+boxes", arr(t.clip_boxes)},
               {"gain_pct", arr(t.clip_gain)},
               {"average_gain_pct", opt(t.clip_average_gain)}};

  auto lat = nlohmann::json::array();
  for (const auto& l : t.latency) {
    lat.push_back({{"requests", l.requests}, {"mean_ms", opt(l.mean_ms)}, {"p95_ms", opt(l.p95_ms)}});
  }
  j["latency"] = lat;
  return j;
}

}  // namespace

void emit_report(const ReportTables& t, const fs::path& output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir.string() + ": " + ec.message());

  write_file(output_dir / "report.json", tables_json(t).dump(2) + "\n");

  std::ostringstream mae;
  mae << "condition";
  for (const auto& b : t.backends) mae << ',' << csv_field(b);
  mae << '\n';
  for (std::size_t c = 0; c < t.conditions.size(); ++c) {
    mae << csv_field(prompting::display_name(t.conditions[c]));
    for (const auto& r : t.mae[c]) mae << ',' << (r.mae ? fixed2(*r.mae) : std::string(kUndefined));
    mae << '\n';
  }
  for (const auto& row : t.improvements) {
    mae << csv_field(row.label);
    for (const auto& v : row.cells) mae << ',' << pct(v);
    mae << '\n';
  }
  mae << "Average Improvement Across Scenarios," << pct(t.average_improvement) << '\n';
  write_file(output_dir / "mae.csv", mae.str());

  std::ostringstream clip;
  clip << "condition";
  for (const auto& b : t.backends) clip << ',' << csv_field(b);
  clip << '\n';
  const auto clip_row = [&](std::string_view label, const std::vector<std::optional<double>>& cells, bool percent) {
    clip << csv_field(label);
    for (const auto& v : cells) clip << ',' << (percent ? pct(v) : (v ? fixed2(*v) : std::string(kSkipped)));
    clip << '\n';
  };
  clip_row(prompting::display_name(kRaw), t.clip_raw, false);
  clip_row(prompting::display_name(kRawBoxes), t.clip_boxes, false);
  clip_row("Improvement (%)", t.clip_gain, true);
  clip << "Average Improvement Across Models," << pct(t.clip_average_gain) << '\n';
  write_file(output_dir / "clipscore.csv", clip.str());

  std::ostringstream lat;
  lat << "backend,requests,mean_ms,p95_ms\n";
  for (std::size_t b = 0; b < t.backends.size(); ++b) {
    const auto& l = t.latency[b];
    lat << csv_field(t.backends[b]) << ',' << l.requests << ','
        << (l.mean_ms ? fixed2(*l.mean_ms) : std::string(kSkipped)) << ','
        << (l.p95_ms ? fixed2(*l.p95_ms) : std::string(kSkipped)) << '\n';
  }
  write_file(output_dir / "latency.csv", lat.str());

  write_file(output_dir / "report.md", render_markdown(t));
}

void emit_records(std::span<const RunRecord> records, const fs::path& output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir.string() + ": " + ec.message());
  std::string text;
  for (const auto& r : records) text += to_json(r).dump() + "\n";
  write_file(output_dir / "records.jsonl", text);
}

}  // namespace detvlm::harness
