#include "detvlm/metrics/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "detvlm/errors.hpp"

namespace detvlm::metrics {

MaeResult mae(std::span<const CountRecord> records) {
  MaeResult r;
  double sum = 0.0;
  for (const auto& rec : records) {
    if (const auto* c = std::get_if<parsing::CountAnswer>(&rec.predicted)) {
      sum += std::abs(static_cast<double>(c->value) - static_cast<double>(rec.actual));
      ++r.n_answered;
    } else {
      ++r.n_undefined;
    }
  }
  if (r.n_answered > 0) r.mae = sum / static_cast<double>(r.n_answered);
  return r;
}

double improvement_pct(double baseline, double enhanced) {
  if (!(baseline > 0.0)) throw MetricError("improvement baseline must be > 0");
  return (baseline - enhanced) / baseline * 100.0;
}

double gain_pct(double baseline, double enhanced) {
  if (!(baseline > 0.0)) throw MetricError("gain baseline must be > 0");
  return (enhanced - baseline) / baseline * 100.0;
}

double average_improvement(std::span<const double> cells) {
  if (cells.empty()) throw MetricError("average of no cells");
  return std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
}

double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Nudge by a few ulps so values printed as x.xx5 in decimal round away
  // from zero even when their binary form sits just below the midpoint.
  const double scaled = value * scale;
  const double nudged = scaled + std::copysign(std::abs(scaled) * 1e-12, scaled);
  return std::round(nudged) / scale;
}

}  // namespace detvlm::metrics
