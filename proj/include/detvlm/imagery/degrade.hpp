#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "detvlm/imagery/raster.hpp"

namespace detvlm::imagery {

// Additive Gaussian noise in pixel-intensity units.
struct NoiseSpec {
  double mean = 0.0;
  double std_dev = 50.0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument if std_dev is negative or not finite.
  void validate() const;
};

// Noise generator: sample i of the stream is the Box-Muller transform of the
// SplitMix64 outputs at counter positions 2*(i/2)+1 and 2*(i/2)+2, taking the
// cosine branch for even i and the sine branch for odd i. Because each sample
// is a pure function of (seed, i), the stream is identical no matter how the
// work is split across threads.
double noise_sample(const NoiseSpec& spec, std::size_t index) noexcept;

// Fills `out` with samples [0, out.size()) of the stream. OpenMP-parallel.
void generate_noise(const NoiseSpec& spec, std::span<double> out);

// output = clamp(round_half_away(input + noise), 0, 255), one independent
// noise sample per channel value. OpenMP-parallel; bit-identical to
// serial::degrade_gaussian.
RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec);

// Same as degrade_gaussian but also hands back the pre-clamp noise drawn for
// every sample, for statistical checks.
RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec, std::vector<double>& noise_out);

namespace serial {

// Single-threaded reference kept for testing the parallel kernels.
RasterImage degrade_gaussian(const RasterImage& img, const NoiseSpec& spec);
void generate_noise(const NoiseSpec& spec, std::span<double> out);

}  // namespace serial

}  // namespace detvlm::imagery
