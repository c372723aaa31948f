#include "detvlm/detection/labels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "detvlm/errors.hpp"

namespace detvlm::detection {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int parse_class(std::string_view tok, std::size_t line_no) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw LabelParseError(line_no, "malformed class id '" + std::string(tok) + "'");
  }
  if (value < 0) throw LabelParseError(line_no, "negative class id");
  return value;
}

double parse_fraction(std::string_view tok, std::size_t line_no, const char* name) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    throw LabelParseError(line_no, std::string("malformed ") + name + " '" + std::string(tok) + "'");
  }
  if (value < 0.0 || value > 1.0) {
    throw LabelParseError(line_no, std::string(name) + " " + std::string(tok) + " outside [0,1]");
  }
  return value;
}

template <typename Fn>
void for_each_record(std::string_view text, std::size_t expected_fields, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    ++line_no;
    const auto fields = split_fields(text.substr(start, end - start));
    if (!fields.empty()) {
      if (fields.size() != expected_fields) {
        throw LabelParseError(line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                           std::to_string(fields.size()));
      }
      fn(fields, line_no);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
}

NormalizedBox parse_box(const std::vector<std::string_view>& f, std::size_t line_no) {
  return {parse_fraction(f[1], line_no, "cx"), parse_fraction(f[2], line_no, "cy"),
          parse_fraction(f[3], line_no, "w"), parse_fraction(f[4], line_no, "h")};
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void append_box(std::string& out, int class_id, const NormalizedBox& b) {
  out += std::to_string(class_id);
  for (double v : {b.cx, b.cy, b.w, b.h}) {
    out += ' ';
    append_number(out, v);
  }
}

}  // namespace

std::vector<GroundTruthLabel> parse_ground_truth(std::string_view text) {
  std::vector<GroundTruthLabel> out;
  for_each_record(text, 5, [&](const auto& f, std::size_t n) {
    out.push_back({parse_class(f[0], n), parse_box(f, n)});
  });
  return out;
}

std::vector<Detection> parse_detections(std::string_view text) {
  std::vector<Detection> out;
  for_each_record(text, 6, [&](const auto& f, std::size_t n) {
    out.push_back({parse_class(f[0], n), parse_box(f, n), parse_fraction(f[5], n, "confidence")});
  });
  return out;
}

std::string format_label_file(const std::vector<GroundTruthLabel>& labels) {
  std::string out;
  for (const auto& l : labels) {
    append_box(out, l.class_id, l.box);
    out += '\n';
  }
  return out;
}

std::string format_label_file(const std::vector<Detection>& detections) {
  std::string out;
  for (const auto& d : detections) {
    append_box(out, d.class_id, d.box);
    out += ' ';
    append_number(out, d.confidence);
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

imagery::PixelRect to_pixel_rect(const NormalizedBox& box, int width, int height) {
  auto px = [](double v, int extent) {
    const double r = std::round(v * extent);
    return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(extent)));
  };
  imagery::PixelRect r{px(box.cx - box.w / 2, width), px(box.cy - box.h / 2, height), px(box.cx + box.w / 2, width),
                       px(box.cy + box.h / 2, height)};
  r.x_max = std::max(r.x_max, r.x_min);
  r.y_max = std::max(r.y_max, r.y_min);
  return r;
}

}  // namespace detvlm::detection
