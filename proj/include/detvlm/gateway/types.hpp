#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detvlm::gateway {

enum class BackendKind { HttpChat, MockFixture, MockSynthetic };

BackendKind parse_backend_kind(std::string_view name);
std::string_view to_string(BackendKind kind);

// Request/response shape for http-chat backends.
//  - OpenAiChat: {"model", "messages":[{"role":"user","content":[text, image_url]}]}
//  - GeminiGenerate: {"contents":[{"parts":[{"text"}, {"inline_data"}]}]}
enum class WireProfile { OpenAiChat, GeminiGenerate };

WireProfile parse_wire_profile(std::string_view name);

struct SyntheticMockSpec {
  // CSV `image_id,count`; when empty the caller supplies the truth map.
  std::string truth_source;
  int error_offset = 0;
  double refusal_rate = 0.0;
  std::uint64_t seed = 0;
};

struct BackendSpec {
  std::string name;
  BackendKind kind = BackendKind::MockSynthetic;
  std::string endpoint;  // full URL, http-chat only
  std::string model_id;
  std::string auth_env;  // environment variable holding the credential
  double timeout_s = 60.0;
  double rate_limit_per_min = 0.0;  // 0 = unlimited
  int max_retries = 3;

  // http-chat wire options.
  WireProfile profile = WireProfile::OpenAiChat;
  std::string auth_header;     // default per profile
  std::string auth_prefix;     // default per profile
  std::string response_pointer;  // JSON pointer to the reply text; default per profile

  std::string fixture_path;  // mock-fixture
  SyntheticMockSpec synthetic;  // mock-synthetic

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct VlmRequest {
  std::string prompt;
  std::vector<std::uint8_t> image_bytes;  // PNG
  std::string image_id;
  std::map<std::string, std::string> metadata;  // task, condition, seed

  void validate() const;
};

enum class FailureCategory {
  Timeout,
  RateLimited,
  Auth,
  Transport,
  MalformedResponse,
  FixtureMiss,
  // Job never reached a backend: image or detections unavailable.
  InputError,
  // Offline report rebuild found no cached exchange.
  CacheMiss,
};

std::string_view to_string(FailureCategory category);
FailureCategory parse_failure_category(std::string_view name);

struct Failure {
  FailureCategory category = FailureCategory::Transport;
  std::string detail;
  friend bool operator==(const Failure&, const Failure&) = default;
};

// One backend round trip. Exactly one of response / failure is set.
struct VlmExchange {
  std::string request_digest;
  std::string backend;
  std::string model;
  std::string prompt;
  std::string image_id;
  std::optional<std::string> response;
  std::optional<Failure> failure;
  double latency_ms = 0.0;
  std::string timestamp;  // ISO-8601 UTC

  bool ok() const noexcept { return response.has_value(); }
  friend bool operator==(const VlmExchange&, const VlmExchange&) = default;
};

// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

}  // namespace detvlm::gateway
