#include "detvlm/imagery/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "detvlm/errors.hpp"

namespace detvlm::imagery {
namespace {

// OpenCV hands back BGR (IMREAD_COLOR already expands gray and drops alpha).
RasterImage from_bgr(const cv::Mat& bgr) {
  RasterImage img(bgr.cols, bgr.rows);
  auto out = img.pixels();
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    std::uint8_t* dst = out.data() + static_cast<std::size_t>(y) * bgr.cols * 3;
    for (int x = 0; x < bgr.cols; ++x) {
      dst[3 * x] = row[x][2];
      dst[3 * x + 1] = row[x][1];
      dst[3 * x + 2] = row[x][0];
    }
  }
  return img;
}

cv::Mat to_bgr(const RasterImage& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  auto src = img.pixels();
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    const std::uint8_t* p = src.data() + static_cast<std::size_t>(y) * img.width() * 3;
    for (int x = 0; x < img.width(); ++x) row[x] = cv::Vec3b(p[3 * x + 2], p[3 * x + 1], p[3 * x]);
  }
  return bgr;
}

std::string extension(ImageFormat format) { return format == ImageFormat::Png ? ".png" : ".jpg"; }

}  // namespace

ImageFormat parse_image_format(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (!lower.empty() && lower.front() == '.') lower.erase(0, 1);
  if (lower == "png") return ImageFormat::Png;
  if (lower == "jpg" || lower == "jpeg") return ImageFormat::Jpeg;
  throw UnsupportedFormatError("unsupported image format '" + std::string(tag) + "'");
}

RasterImage decode_image(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) throw DecodeError("empty image buffer");
  cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw DecodeError(std::string("image decode failed: ") + e.what());
  }
  if (bgr.empty()) throw DecodeError("image decode failed");
  return from_bgr(bgr);
}

RasterImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read image '" + path.string() + "'");
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError("'" + path.string() + "': " + e.what());
  }
}

std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format) {
  if (img.empty()) throw std::invalid_argument("cannot encode an empty image");
  std::vector<std::uint8_t> out;
  std::vector<int> params;
  if (format == ImageFormat::Png) {
    params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  } else {
    params = {cv::IMWRITE_JPEG_QUALITY, 95};
  }
  if (!cv::imencode(extension(format), to_bgr(img), out, params)) throw Error("image encode failed");
  return out;
}

void save_image(const RasterImage& img, const std::filesystem::path& path, ImageFormat format) {
  const auto bytes = encode_image(img, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing image '" + path.string() + "'");
}

}  // namespace detvlm::imagery
