#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "detvlm/gateway/truth.hpp"
#include "detvlm/gateway/types.hpp"

namespace detvlm::gateway {

struct DispatchResult {
  std::optional<std::string> response;
  std::optional<Failure> failure;
  // Worth retrying (timeouts, 429, 5xx, connection errors).
  bool transient = false;

  static DispatchResult ok(std::string text) { return {std::move(text), std::nullopt, false}; }
  static DispatchResult fail(FailureCategory c, std::string detail, bool transient = false) {
    return {std::nullopt, Failure{c, std::move(detail)}, transient};
  }
};

class Backend {
 public:
  virtual ~Backend() = default;
  // One attempt. Never throws for backend-side problems.
  virtual DispatchResult dispatch(const VlmRequest& request, const std::string& digest) = 0;
};

// Single-turn multimodal chat over HTTP(S). The credential is read from the
// named environment variable at dispatch time and never stored.
class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(BackendSpec spec);
  DispatchResult dispatch(const VlmRequest& request, const std::string& digest) override;

  // Request body for the configured wire profile.
  nlohmann::json build_body(const VlmRequest& request) const;

 private:
  BackendSpec spec_;
};

// Canned responses from a JSON file. Accepted shapes: an object mapping
// digest to text, or an array of {"image_id", "prompt", "response"}
// objects (optionally with "backend"), matched on those fields.
class FixtureBackend final : public Backend {
 public:
  FixtureBackend(const std::string& path, std::string backend_name);
  FixtureBackend(nlohmann::json fixture, std::string backend_name);
  DispatchResult dispatch(const VlmRequest& request, const std::string& digest) override;

 private:
  nlohmann::json fixture_;
  std::string backend_name_;
};

// Answers from ground truth: "There are N aircraft visible in this image."
// with N = truth + error_offset (floored at 0), or a refusal with
// probability refusal_rate. The refusal draw is a pure function of
// (seed, digest), so results do not depend on dispatch order.
class SyntheticBackend final : public Backend {
 public:
  SyntheticBackend(SyntheticMockSpec spec, TruthCounts truth);
  DispatchResult dispatch(const VlmRequest& request, const std::string& digest) override;

  static constexpr std::string_view kRefusal =
      "I'm sorry, but I am unable to determine the number of aircraft in this image.";

 private:
  SyntheticMockSpec spec_;
  TruthCounts truth_;
};

// Builds the backend for `spec`. For mock-synthetic, `truth` is used when
// spec.synthetic.truth_source is empty.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const TruthCounts* truth = nullptr);

}  // namespace detvlm::gateway
