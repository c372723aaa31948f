#include "detvlm/gateway/gateway.hpp"

#include <algorithm>
#include <random>

#include "detvlm/gateway/digest.hpp"
#include "detvlm/util/splitmix.hpp"

namespace detvlm::gateway {

Gateway::Gateway(BackendSpec spec, std::unique_ptr<Backend> backend, ExchangeCache* cache, Clock& clock,
                 RetryPolicy retry)
    : spec_(std::move(spec)),
      backend_(std::move(backend)),
      cache_(cache),
      clock_(clock),
      retry_(retry),
      limiter_(spec_.rate_limit_per_min, clock) {
  spec_.validate();
}

std::string Gateway::digest(const VlmRequest& request) const {
  return request_digest(spec_.name, spec_.model_id, request.prompt, request.image_bytes);
}

VlmExchange Gateway::query(const VlmRequest& request) {
  request.validate();
  const auto key = digest(request);
  if (cache_) {
    if (auto hit = cache_->lookup(key); hit && hit->ok()) return *hit;
  }

  VlmExchange ex;
  ex.request_digest = key;
  ex.backend = spec_.name;
  ex.model = spec_.model_id;
  ex.prompt = request.prompt;
  ex.image_id = request.image_id;

  // Jitter stream is seeded from the digest so a replayed run backs off
  // identically.
  std::mt19937_64 jitter(util::mix64(std::stoull(key.substr(0, 16), nullptr, 16)));
  const auto started = clock_.now();
  DispatchResult result;
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++dispatches_;
    result = backend_->dispatch(request, key);
    if (result.response || !result.transient || attempt >= spec_.max_retries) break;

    const auto ceiling = std::min(retry_.cap, retry_.base * (std::int64_t{1} << std::min(attempt, 20)));
    std::uniform_int_distribution<std::int64_t> pick(0, ceiling.count());
    clock_.sleep_for(std::chrono::milliseconds(pick(jitter)));
  }
  ex.latency_ms = std::chrono::duration<double, std::milli>(clock_.now() - started).count();
  ex.timestamp = utc_timestamp();
  if (result.response) {
    ex.response = std::move(result.response);
  } else {
    ex.failure = result.failure.value_or(Failure{FailureCategory::Transport, "no response"});
  }
  if (cache_) cache_->store(ex);
  return ex;
}

VlmExchange Gateway::replay(const VlmRequest& request) const {
  const auto key = digest(request);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) return *hit;
  }
  VlmExchange ex;
  ex.request_digest = key;
  ex.backend = spec_.name;
  ex.model = spec_.model_id;
  ex.prompt = request.prompt;
  ex.image_id = request.image_id;
  ex.failure = Failure{FailureCategory::CacheMiss, "no cached exchange"};
  return ex;
}

VlmExchange query(const BackendSpec& backend, const VlmRequest& request) {
  Gateway gw(backend, make_backend(backend));
  return gw.query(request);
}

}  // namespace detvlm::gateway
