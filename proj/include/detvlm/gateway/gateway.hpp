#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "detvlm/gateway/backends.hpp"
#include "detvlm/gateway/cache.hpp"
#include "detvlm/gateway/clock.hpp"
#include "detvlm/gateway/rate_limiter.hpp"
#include "detvlm/gateway/types.hpp"

namespace detvlm::gateway {

// Exponential backoff with full jitter: attempt k (0-based) waits a uniform
// draw from [0, min(cap, base * 2^k)].
struct RetryPolicy {
  std::chrono::milliseconds base{1000};
  std::chrono::milliseconds cap{30000};
};

// Cache-first, rate-limited, retrying front end for one backend. Safe to
// call query() from several threads.
class Gateway {
 public:
  Gateway(BackendSpec spec, std::unique_ptr<Backend> backend, ExchangeCache* cache = nullptr,
          Clock& clock = SystemClock::instance(), RetryPolicy retry = {});

  const BackendSpec& spec() const noexcept { return spec_; }
  std::string digest(const VlmRequest& request) const;

  // Returns a cached successful exchange when one exists, otherwise
  // dispatches (with retries) and stores the outcome. Failures are
  // recorded in the exchange, never thrown.
  VlmExchange query(const VlmRequest& request);

  // Cache only; a miss yields a CacheMiss failure. Never dispatches.
  VlmExchange replay(const VlmRequest& request) const;

  // Backend attempts made so far, retries included.
  std::size_t dispatch_count() const noexcept { return dispatches_.load(); }

 private:
  BackendSpec spec_;
  std::unique_ptr<Backend> backend_;
  ExchangeCache* cache_;
  Clock& clock_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  std::atomic<std::size_t> dispatches_{0};
};

// One-off query without a cache.
VlmExchange query(const BackendSpec& backend, const VlmRequest& request);

}  // namespace detvlm::gateway
