#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "detvlm/errors.hpp"
#include "detvlm/imagery/degrade.hpp"
#include "detvlm/imagery/io.hpp"
#include "detvlm/imagery/overlay.hpp"
#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"

using namespace detvlm::imagery;

namespace {

RasterImage gradient(int w, int h) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, {static_cast<std::uint8_t>((x * 7) % 256), static_cast<std::uint8_t>((y * 13) % 256),
                     static_cast<std::uint8_t>((x + y) % 256)});
    }
  }
  return img;
}

}  // namespace

TEST(Raster, FromPixelsChecksSize) {
  EXPECT_THROW(RasterImage::from_pixels(2, 2, std::vector<std::uint8_t>(11)), std::invalid_argument);
  auto img = RasterImage::from_pixels(2, 2, std::vector<std::uint8_t>(12, 5));
  EXPECT_EQ(img.at(1, 1), (Rgb{5, 5, 5}));
}

TEST(ImageIo, PngRoundTripIsLossless) {
  const auto img = gradient(17, 9);
  EXPECT_EQ(decode_image(encode_png(img)), img);
}

TEST(ImageIo, RejectsGarbageAndUnknownFormats) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4};
  EXPECT_THROW(decode_image(junk), detvlm::DecodeError);
  EXPECT_THROW(parse_image_format("tiff"), detvlm::UnsupportedFormatError);
  EXPECT_THROW(load_image("/nonexistent/file.png"), detvlm::IoError);
}

TEST(ImageIo, SaveAndLoad) {
  testsupport::TempDir dir;
  const auto img = gradient(8, 8);
  save_image(img, dir / "a.png", ImageFormat::Png);
  EXPECT_EQ(load_image(dir / "a.png"), img);
  save_image(img, dir / "a.jpg", ImageFormat::Jpeg);
  EXPECT_EQ(load_image(dir / "a.jpg").width(), 8);
}

TEST(Noise, ParallelStreamMatchesSerial) {
  NoiseSpec spec{3.0, 20.0, 99};
  std::vector<double> par(10001), ser(10001);
  generate_noise(spec, par);
  serial::generate_noise(spec, ser);
  EXPECT_EQ(par, ser);
  for (std::size_t i = 0; i < ser.size(); i += 997) EXPECT_EQ(ser[i], noise_sample(spec, i));
}

TEST(Noise, DegradeParallelMatchesSerialForOddSizes) {
  for (int w : {1, 3, 31, 64}) {
    const auto img = gradient(w, 7);
    NoiseSpec spec{0.0, 50.0, static_cast<std::uint64_t>(w)};
    EXPECT_EQ(degrade_gaussian(img, spec), serial::degrade_gaussian(img, spec)) << "width " << w;
  }
}

TEST(Noise, OutputIsClampedRoundedSum) {
  const auto img = gradient(40, 30);
  NoiseSpec spec{0.0, 80.0, 5};
  std::vector<double> noise;
  const auto out = degrade_gaussian(img, spec, noise);
  ASSERT_EQ(noise.size(), img.sample_count());
  const auto in_px = img.pixels();
  const auto out_px = out.pixels();
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const double want = std::clamp(std::round(in_px[i] + noise[i]), 0.0, 255.0);
    ASSERT_EQ(out_px[i], static_cast<std::uint8_t>(want)) << i;
  }
}

TEST(Noise, ZeroStdIsIdentity) {
  const auto img = gradient(10, 10);
  EXPECT_EQ(degrade_gaussian(img, {0.0, 0.0, 1}), img);
}

TEST(Noise, RejectsBadStd) {
  EXPECT_THROW((NoiseSpec{0.0, -1.0, 0}).validate(), std::invalid_argument);
  EXPECT_THROW((NoiseSpec{0.0, std::nan(""), 0}).validate(), std::invalid_argument);
}

TEST(Noise, MomentsMatchSpec) {
  NoiseSpec spec{10.0, 25.0, 1234};
  std::vector<double> v(200000);
  generate_noise(spec, v);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(mean, 10.0, 0.3);
  EXPECT_NEAR(std::sqrt(ss / (v.size() - 1)), 25.0, 0.3);
}

TEST(Noise, SeedsAreIndependent) {
  const auto img = gradient(32, 32);
  EXPECT_EQ(degrade_gaussian(img, {0, 50, 1}), degrade_gaussian(img, {0, 50, 1}));
  EXPECT_NE(degrade_gaussian(img, {0, 50, 1}), degrade_gaussian(img, {0, 50, 2}));
}

TEST(Overlay, MatchesStripOracle) {
  const RasterImage img(32, 32, {0, 0, 0});
  const OverlayStyle style{{255, 0, 0}, 2};
  for (const PixelRect r : {PixelRect{4, 5, 20, 25}, PixelRect{0, 0, 31, 31}, PixelRect{10, 10, 11, 11},
                            PixelRect{-5, 28, 8, 40}, PixelRect{7, 7, 7, 7}}) {
    const auto out = render_overlays(img, std::span(&r, 1), style);
    const auto expect = oracle::perimeter_pixels(32, 32, r, style.thickness);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const Rgb want = expect.count({x, y}) ? style.color : Rgb{0, 0, 0};
        ASSERT_EQ(out.at(x, y), want) << x << "," << y;
      }
    }
  }
}

TEST(Overlay, ThinBoxHasFortyPixels) {
  const RasterImage img(32, 32);
  const PixelRect r{10, 10, 20, 20};
  const auto out = render_overlays(img, std::span(&r, 1), {{1, 2, 3}, 1});
  int painted = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) painted += out.at(x, y) == Rgb{1, 2, 3};
  }
  EXPECT_EQ(painted, 40);
}

TEST(Overlay, ParallelMatchesSerialWithManyBoxes) {
  const auto img = gradient(97, 61);
  std::vector<PixelRect> rects;
  for (int i = 0; i < 25; ++i) rects.push_back({i * 4 - 10, i * 2 - 3, i * 4 + 15, i * 3 + 8});
  for (int t : {1, 2, 5}) {
    const OverlayStyle style{{0, 255, 0}, t};
    EXPECT_EQ(render_overlays(img, rects, style), serial::render_overlays(img, rects, style));
  }
}

TEST(Overlay, EmptyBoxListIsIdentityAndInvertedRectThrows) {
  const auto img = gradient(12, 12);
  EXPECT_EQ(render_overlays(img, {}, {}), img);
  const PixelRect bad{5, 5, 4, 6};
  EXPECT_THROW(render_overlays(img, std::span(&bad, 1), {}), std::invalid_argument);
  EXPECT_THROW((OverlayStyle{{0, 0, 0}, 0}).validate(), std::invalid_argument);
}

TEST(Overlay, Idempotent) {
  const auto img = gradient(20, 20);
  const PixelRect r{2, 3, 15, 16};
  const auto once = render_overlays(img, std::span(&r, 1), {});
  EXPECT_EQ(render_overlays(once, std::span(&r, 1), {}), once);
}
