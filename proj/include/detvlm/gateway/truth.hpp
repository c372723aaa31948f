#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace detvlm::gateway {

using TruthCounts = std::map<std::string, int>;

// CSV `image_id,count` with an optional header row. Throws IoError or
// std::invalid_argument (with the line number) on bad rows.
TruthCounts parse_truth_counts(std::string_view text);
TruthCounts load_truth_counts(const std::filesystem::path& path);

}  // namespace detvlm::gateway
