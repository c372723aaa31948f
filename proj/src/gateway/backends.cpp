#include "detvlm/gateway/backends.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <httplib.h>

#include "detvlm/detection/labels.hpp"
#include "detvlm/gateway/digest.hpp"
#include "detvlm/util/splitmix.hpp"

namespace detvlm::gateway {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string default_auth_header(WireProfile p) {
  return p == WireProfile::GeminiGenerate ? "x-goog-api-key" : "Authorization";
}
std::string default_auth_prefix(WireProfile p) { return p == WireProfile::GeminiGenerate ? "" : "Bearer "; }
std::string default_response_pointer(WireProfile p) {
  return p == WireProfile::GeminiGenerate ? "/candidates/0/content/parts/0/text" : "/choices/0/message/content";
}

// First 64 bits of a hex digest.
std::uint64_t digest_prefix(const std::string& digest) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < digest.size() && i < 16; ++i) {
    const char c = digest[i];
    const int nib = (c >= '0' && c <= '9') ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : 0;
    v = (v << 4) | static_cast<std::uint64_t>(nib);
  }
  return v;
}

std::string meta(const VlmRequest& r, const std::string& key) {
  auto it = r.metadata.find(key);
  return it == r.metadata.end() ? std::string() : it->second;
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendSpec spec) : spec_(std::move(spec)) {
  if (spec_.auth_header.empty()) spec_.auth_header = default_auth_header(spec_.profile);
  if (spec_.auth_prefix.empty() && spec_.profile == WireProfile::OpenAiChat) {
    spec_.auth_prefix = default_auth_prefix(spec_.profile);
  }
  if (spec_.response_pointer.empty()) spec_.response_pointer = default_response_pointer(spec_.profile);
  split_url(spec_.endpoint);
}

nlohmann::json HttpChatBackend::build_body(const VlmRequest& request) const {
  const auto b64 = base64_encode(request.image_bytes);
  if (spec_.profile == WireProfile::GeminiGenerate) {
    return {{"contents",
             nlohmann::json::array({{{"role", "user"},
                                     {"parts", nlohmann::json::array(
                                                   {{{"text", request.prompt}},
                                                    {{"inline_data", {{"mime_type", "image/png"}, {"data", b64}}}}})}}})}};
  }
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  content.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + b64}}}});
  return {{"model", spec_.model_id},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::move(content)}}})}};
}

DispatchResult HttpChatBackend::dispatch(const VlmRequest& request, const std::string&) {
  httplib::Headers headers;
  if (!spec_.auth_env.empty()) {
    const char* secret = std::getenv(spec_.auth_env.c_str());
    if (secret == nullptr || *secret == '\0') {
      return DispatchResult::fail(FailureCategory::Auth, "environment variable " + spec_.auth_env + " is not set");
    }
    headers.emplace(spec_.auth_header, spec_.auth_prefix + secret);
  }

  const auto url = split_url(spec_.endpoint);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(spec_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  const auto body = build_body(request).dump();
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= timeout * 0.9)) {
      return DispatchResult::fail(FailureCategory::Timeout, "request timed out", true);
    }
    return DispatchResult::fail(FailureCategory::Transport, httplib::to_string(err), true);
  }

  const int status = res->status;
  if (status == 401 || status == 403) {
    return DispatchResult::fail(FailureCategory::Auth, "HTTP " + std::to_string(status));
  }
  if (status == 429) return DispatchResult::fail(FailureCategory::RateLimited, "HTTP 429", true);
  if (status >= 500) return DispatchResult::fail(FailureCategory::Transport, "HTTP " + std::to_string(status), true);
  if (status < 200 || status >= 300) {
    return DispatchResult::fail(FailureCategory::Transport, "HTTP " + std::to_string(status));
  }

  try {
    const auto json = nlohmann::json::parse(res->body);
    const auto& text = json.at(nlohmann::json::json_pointer(spec_.response_pointer));
    if (!text.is_string()) {
      return DispatchResult::fail(FailureCategory::MalformedResponse, spec_.response_pointer + " is not a string");
    }
    return DispatchResult::ok(text.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    return DispatchResult::fail(FailureCategory::MalformedResponse, e.what());
  }
}

FixtureBackend::FixtureBackend(const std::string& path, std::string backend_name)
    : backend_name_(std::move(backend_name)) {
  try {
    fixture_ = nlohmann::json::parse(detection::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("fixture '" + path + "' is not valid JSON: " + e.what());
  }
  if (!fixture_.is_object() && !fixture_.is_array()) {
    throw std::invalid_argument("fixture '" + path + "' must be an object or array");
  }
}

FixtureBackend::FixtureBackend(nlohmann::json fixture, std::string backend_name)
    : fixture_(std::move(fixture)), backend_name_(std::move(backend_name)) {}

DispatchResult FixtureBackend::dispatch(const VlmRequest& request, const std::string& digest) {
  if (fixture_.is_object()) {
    auto it = fixture_.find(digest);
    if (it != fixture_.end() && it->is_string()) return DispatchResult::ok(it->get<std::string>());
  } else {
    for (const auto& entry : fixture_) {
      if (entry.value("image_id", "") != request.image_id || entry.value("prompt", "") != request.prompt) continue;
      if (entry.contains("backend") && !backend_name_.empty() && entry["backend"] != backend_name_) continue;
      return DispatchResult::ok(entry.at("response").get<std::string>());
    }
  }
  return DispatchResult::fail(FailureCategory::FixtureMiss, "no fixture for digest " + digest);
}

SyntheticBackend::SyntheticBackend(SyntheticMockSpec spec, TruthCounts truth)
    : spec_(std::move(spec)), truth_(std::move(truth)) {}

DispatchResult SyntheticBackend::dispatch(const VlmRequest& request, const std::string& digest) {
  const double draw = util::to_unit(util::hash_combine(spec_.seed, digest_prefix(digest)));
  if (draw < spec_.refusal_rate) return DispatchResult::ok(std::string(kRefusal));

  auto it = truth_.find(request.image_id);
  if (it == truth_.end()) {
    return DispatchResult::fail(FailureCategory::FixtureMiss, "no ground-truth count for '" + request.image_id + "'");
  }
  const int n = std::max(0, it->second + spec_.error_offset);
  const auto task = meta(request, "task");
  if (task == "route") {
    return DispatchResult::ok(n > 0 ? "Primary route: partially obstructed. Secondary route: unobstructed."
                                    : "Primary route: unobstructed. Secondary route: unobstructed.");
  }
  if (task == "caption") {
    return DispatchResult::ok("The image is an aerial view of an airport with " + std::to_string(n) +
                              " aircraft parked on the apron.");
  }
  return DispatchResult::ok("There are " + std::to_string(n) + " aircraft visible in this image.");
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const TruthCounts* truth) {
  spec.validate();
  switch (spec.kind) {
    case BackendKind::HttpChat:
      return std::make_unique<HttpChatBackend>(spec);
    case BackendKind::MockFixture:
      return std::make_unique<FixtureBackend>(spec.fixture_path, spec.name);
    case BackendKind::MockSynthetic: {
      TruthCounts counts;
      if (!spec.synthetic.truth_source.empty()) {
        counts = load_truth_counts(spec.synthetic.truth_source);
      } else if (truth) {
        counts = *truth;
      }
      return std::make_unique<SyntheticBackend>(spec.synthetic, std::move(counts));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detvlm::gateway
