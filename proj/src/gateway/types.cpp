#include "detvlm/gateway/types.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>

namespace detvlm::gateway {
namespace {

constexpr std::array<std::pair<FailureCategory, std::string_view>, 8> kCategories{{
    {FailureCategory::Timeout, "timeout"},
    {FailureCategory::RateLimited, "rate-limited"},
    {FailureCategory::Auth, "auth"},
    {FailureCategory::Transport, "transport"},
    {FailureCategory::MalformedResponse, "malformed-response"},
    {FailureCategory::FixtureMiss, "fixture-miss"},
    {FailureCategory::InputError, "input-error"},
    {FailureCategory::CacheMiss, "cache-miss"},
}};

}  // namespace

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "http-chat") return BackendKind::HttpChat;
  if (name == "mock-fixture") return BackendKind::MockFixture;
  if (name == "mock-synthetic") return BackendKind::MockSynthetic;
  throw std::invalid_argument("unknown backend kind '" + std::string(name) + "'");
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::HttpChat: return "http-chat";
    case BackendKind::MockFixture: return "mock-fixture";
    case BackendKind::MockSynthetic: return "mock-synthetic";
  }
  return "?";
}

WireProfile parse_wire_profile(std::string_view name) {
  if (name == "openai-chat") return WireProfile::OpenAiChat;
  if (name == "gemini-generate") return WireProfile::GeminiGenerate;
  throw std::invalid_argument("unknown wire profile '" + std::string(name) + "'");
}

std::string_view to_string(FailureCategory category) {
  for (const auto& [c, name] : kCategories) {
    if (c == category) return name;
  }
  return "?";
}

FailureCategory parse_failure_category(std::string_view name) {
  for (const auto& [c, n] : kCategories) {
    if (n == name) return c;
  }
  throw std::invalid_argument("unknown failure category '" + std::string(name) + "'");
}

void BackendSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("name: must not be empty");
  if (kind == BackendKind::HttpChat) {
    if (endpoint.empty()) throw std::invalid_argument("endpoint: required for http-chat");
    if (model_id.empty()) throw std::invalid_argument("model_id: required for http-chat");
  }
  if (kind == BackendKind::MockFixture && fixture_path.empty()) {
    throw std::invalid_argument("fixture: required for mock-fixture");
  }
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout: must be > 0");
  if (max_retries < 0) throw std::invalid_argument("max_retries: must be >= 0");
  if (!(rate_limit_per_min >= 0.0)) throw std::invalid_argument("rate_limit: must be >= 0");
  if (!(synthetic.refusal_rate >= 0.0 && synthetic.refusal_rate <= 1.0)) {
    throw std::invalid_argument("refusal_rate: must be in [0,1]");
  }
}

void VlmRequest::validate() const {
  if (prompt.empty()) throw std::invalid_argument("request prompt is empty");
  if (image_bytes.empty()) throw std::invalid_argument("request image is empty");
}

std::string utc_timestamp() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto secs = time_point_cast<seconds>(now);
  const auto ms = duration_cast<milliseconds>(now - secs).count();
  const std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

}  // namespace detvlm::gateway
