#include "detvlm/gateway/truth.hpp"

#include <charconv>
#include <stdexcept>

#include "detvlm/detection/labels.hpp"

namespace detvlm::gateway {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

TruthCounts parse_truth_counts(std::string_view text) {
  TruthCounts out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw std::invalid_argument("truth counts line " + std::to_string(line_no) + ": expected image_id,count");
    }
    const auto id = trim(line.substr(0, comma));
    const auto count_text = trim(line.substr(comma + 1));
    int count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count < 0) {
      if (line_no == 1 && count_text == "count") continue;  // header row
      throw std::invalid_argument("truth counts line " + std::to_string(line_no) + ": bad count '" +
                                  std::string(count_text) + "'");
    }
    out[std::string(id)] = count;
  }
  return out;
}

TruthCounts load_truth_counts(const std::filesystem::path& path) {
  return parse_truth_counts(detection::read_text_file(path.string()));
}

}  // namespace detvlm::gateway
