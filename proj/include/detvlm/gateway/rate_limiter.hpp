#pragma once

#include <deque>
#include <mutex>

#include "detvlm/gateway/clock.hpp"

namespace detvlm::gateway {

// Sliding-window limiter: no 60-second window ever holds more than
// `per_minute` dispatches. A limit of 0 disables limiting.
class RateLimiter {
 public:
  RateLimiter(double per_minute, Clock& clock);

  // Blocks (via the clock) until a dispatch is allowed, then records it.
  void acquire();

 private:
  std::size_t capacity_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<Clock::time_point> recent_;
};

}  // namespace detvlm::gateway
