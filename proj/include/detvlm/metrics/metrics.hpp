#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detvlm/parsing/answer.hpp"

namespace detvlm::metrics {

struct CountRecord {
  std::string image_id;
  parsing::ParsedAnswer predicted;
  int actual = 0;
};

// `mae` is empty (the undefined marker) when no record was answered.
struct MaeResult {
  std::optional<double> mae;
  std::size_t n_answered = 0;
  std::size_t n_undefined = 0;

  bool defined() const noexcept { return mae.has_value(); }
  friend bool operator==(const MaeResult&, const MaeResult&) = default;
};

// Mean |predicted - actual| over records whose prediction is a Count
// (qualifiers taken at face value). Everything else counts as undefined.
MaeResult mae(std::span<const CountRecord> records);

// Relative reduction of an error metric, in percent:
// (baseline - enhanced) / baseline * 100. Throws MetricError unless
// baseline > 0.
double improvement_pct(double baseline, double enhanced);

// Relative gain of a score where higher is better, in percent:
// (enhanced - baseline) / baseline * 100. Throws MetricError unless
// baseline > 0.
double gain_pct(double baseline, double enhanced);

// Arithmetic mean; throws MetricError on empty input.
double average_improvement(std::span<const double> cells);

// Half-away-from-zero rounding to `decimals` places, used for every
// percentage shown in reports.
double round_half_away(double value, int decimals = 2);

}  // namespace detvlm::metrics
