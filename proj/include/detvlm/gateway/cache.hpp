#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "detvlm/gateway/types.hpp"

namespace detvlm::gateway {

nlohmann::json to_json(const VlmExchange& exchange);
// Throws nlohmann::json::exception or std::invalid_argument on bad input.
VlmExchange exchange_from_json(const nlohmann::json& j);

// Append-only JSON-lines store of exchanges keyed by request digest. The
// newest record for a digest wins. Corrupt lines are skipped and counted.
class ExchangeCache {
 public:
  // Loads existing records; creates the file on first store. Throws IoError
  // if the file exists but cannot be opened.
  explicit ExchangeCache(std::filesystem::path path);

  std::optional<VlmExchange> lookup(const std::string& digest) const;
  void store(const VlmExchange& exchange);

  std::size_t size() const;
  std::size_t skipped_lines() const noexcept { return skipped_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, VlmExchange> entries_;
  std::size_t skipped_ = 0;
  std::ofstream out_;
};

}  // namespace detvlm::gateway
