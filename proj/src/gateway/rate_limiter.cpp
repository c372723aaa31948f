#include "detvlm/gateway/rate_limiter.hpp"

#include <cmath>
#include <thread>

namespace detvlm::gateway {

void SystemClock::sleep_for(duration d) {
  if (d > duration::zero()) std::this_thread::sleep_for(d);
}

SystemClock& SystemClock::instance() {
  static SystemClock clock;
  return clock;
}

RateLimiter::RateLimiter(double per_minute, Clock& clock)
    : capacity_(per_minute > 0.0 ? static_cast<std::size_t>(std::floor(per_minute)) : 0), clock_(clock) {
  // Fractional limits below one still allow one dispatch per window.
  if (per_minute > 0.0 && capacity_ == 0) capacity_ = 1;
}

void RateLimiter::acquire() {
  if (capacity_ == 0) return;
  constexpr auto kWindow = std::chrono::seconds(60);
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = clock_.now();
    while (!recent_.empty() && now - recent_.front() >= kWindow) recent_.pop_front();
    if (recent_.size() < capacity_) {
      recent_.push_back(now);
      return;
    }
    const auto wait = recent_.front() + kWindow - now;
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

}  // namespace detvlm::gateway
