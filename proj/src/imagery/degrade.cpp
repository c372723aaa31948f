#include "detvlm/imagery/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "detvlm/util/splitmix.hpp"

namespace detvlm::imagery {
namespace {

struct NormalPair {
  double cos_branch;
  double sin_branch;
};

NormalPair standard_normal_pair(std::uint64_t seed, std::size_t pair) noexcept {
  const auto base = 2 * static_cast<std::uint64_t>(pair);
  const double u1 = util::to_unit_open_low(util::splitmix_at(seed, base + 1));
  const double u2 = util::to_unit(util::splitmix_at(seed, base + 2));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::uint8_t add_and_clamp(std::uint8_t value, double noise) noexcept {
  const double shifted = std::round(static_cast<double>(value) + noise);
  return static_cast<std::uint8_t>(std::clamp(shifted, 0.0, 255.0));
}

}  // namespace

void NoiseSpec::validate() const {
  if (!std::isfinite(mean)) throw std::invalid_argument("noise mean must be finite");
  if (!std::isfinite(std_dev) || std_dev < 0.0) throw std::invalid_argument("noise std_dev must be >= 0");
}

double noise_sample(const NoiseSpec& spec, std::size_t index) noexcept {
  const auto pair = standard_normal_pair(spec.seed, index / 2);
  const double z = (index % 2 == 0) ? pair.cos_branch : pair.sin_branch;
  return spec.mean + spec.std_dev * z;
}

void generate_noise(const NoiseSpec& spec, std::span<double> out) {
  spec.validate();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const std::ptrdiff_t pairs = (n + 1) / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < pairs; ++k) {
    const auto z = standard_normal_pair(spec.seed, static_cast<std::size_t>(k));
    out[2 * k] = spec.mean + spec.std_dev * z.cos_branch;
    if (2 * k + 1 < n) out[2 * k + 1] = spec.mean + spec.std_dev * z.sin_branch;
  }
}

RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec, std::vector<double>& noise_out) {
  spec.validate();
  noise_out.resize(img.sample_count());
  generate_noise(spec, noise_out);
  RasterImage out = img;
  auto dst = out.pixels();
  const auto src = img.pixels();
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = add_and_clamp(src[i], noise_out[i]);
  return out;
}

RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec) {
  spec.validate();
  RasterImage out = img;
  auto dst = out.pixels();
  const auto src = img.pixels();
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
  const std::ptrdiff_t pairs = (n + 1) / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < pairs; ++k) {
    const auto z = standard_normal_pair(spec.seed, static_cast<std::size_t>(k));
    dst[2 * k] = add_and_clamp(src[2 * k], spec.mean + spec.std_dev * z.cos_branch);
    if (2 * k + 1 < n) dst[2 * k + 1] = add_and_clamp(src[2 * k + 1], spec.mean + spec.std_dev * z.sin_branch);
  }
  return out;
}

namespace serial {

void generate_noise(const NoiseSpec& spec, std::span<double> out) {
  spec.validate();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = noise_sample(spec, i);
}

RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec) {
  spec.validate();
  RasterImage out = img;
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double v = std::round(static_cast<double>(dst[i]) + noise_sample(spec, i));
    dst[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
  return out;
}

}  // namespace serial

}  // namespace detvlm::imagery
