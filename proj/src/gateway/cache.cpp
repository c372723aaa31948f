#include "detvlm/gateway/cache.hpp"

#include <iostream>
#include <stdexcept>

#include "detvlm/errors.hpp"

namespace detvlm::gateway {

nlohmann::json to_json(const VlmExchange& e) {
  nlohmann::json j;
  j["digest"] = e.request_digest;
  j["backend"] = e.backend;
  j["model"] = e.model;
  j["prompt"] = e.prompt;
  j["image_id"] = e.image_id;
  if (e.response) {
    j["response"] = *e.response;
  } else if (e.failure) {
    j["failure"] = {{"category", std::string(to_string(e.failure->category))}, {"detail", e.failure->detail}};
  }
  j["latency_ms"] = e.latency_ms;
  j["timestamp"] = e.timestamp;
  return j;
}

VlmExchange exchange_from_json(const nlohmann::json& j) {
  VlmExchange e;
  e.request_digest = j.at("digest").get<std::string>();
  e.backend = j.at("backend").get<std::string>();
  e.model = j.value("model", "");
  e.prompt = j.value("prompt", "");
  e.image_id = j.value("image_id", "");
  const bool has_response = j.contains("response");
  const bool has_failure = j.contains("failure");
  if (has_response == has_failure) throw std::invalid_argument("exactly one of response/failure required");
  if (has_response) {
    e.response = j.at("response").get<std::string>();
  } else {
    const auto& f = j.at("failure");
    e.failure = Failure{parse_failure_category(f.at("category").get<std::string>()), f.value("detail", "")};
  }
  e.latency_ms = j.at("latency_ms").get<double>();
  if (e.latency_ms < 0.0) throw std::invalid_argument("negative latency");
  e.timestamp = j.value("timestamp", "");
  if (e.request_digest.empty()) throw std::invalid_argument("empty digest");
  return e;
}

ExchangeCache::ExchangeCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw IoError("cannot open cache '" + path_.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto e = exchange_from_json(nlohmann::json::parse(line));
      auto key = e.request_digest;
      entries_.insert_or_assign(std::move(key), std::move(e));
    } catch (const std::exception& ex) {
      ++skipped_;
      std::cerr << "warning: " << path_.string() << ":" << line_no << ": skipping corrupt cache line ("
                << ex.what() << ")\n";
    }
  }
}

std::optional<VlmExchange> ExchangeCache::lookup(const std::string& digest) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ExchangeCache::store(const VlmExchange& exchange) {
  const auto line = to_json(exchange).dump();
  std::lock_guard lock(mutex_);
  if (!out_.is_open()) {
    out_.open(path_, std::ios::app);
    if (!out_) throw IoError("cannot append to cache '" + path_.string() + "'");
  }
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("write to cache '" + path_.string() + "' failed");
  entries_.insert_or_assign(exchange.request_digest, exchange);
}

std::size_t ExchangeCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace detvlm::gateway
