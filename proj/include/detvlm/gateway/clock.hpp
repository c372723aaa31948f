#pragma once

#include <chrono>
#include <mutex>

namespace detvlm::gateway {

// Time source for rate limiting, backoff and latency. Tests swap in
// VirtualClock so waits complete instantly and are observable.
class Clock {
 public:
  using duration = std::chrono::steady_clock::duration;
  using time_point = std::chrono::steady_clock::time_point;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(duration d) override;

  static SystemClock& instance();
};

// Manual clock: sleep_for advances time immediately.
class VirtualClock final : public Clock {
 public:
  time_point now() override {
    std::lock_guard lock(mutex_);
    return now_;
  }
  void sleep_for(duration d) override {
    std::lock_guard lock(mutex_);
    if (d > duration::zero()) now_ += d;
    slept_ += d > duration::zero() ? d : duration::zero();
  }
  void advance(duration d) { sleep_for(d); }
  duration total_slept() {
    std::lock_guard lock(mutex_);
    return slept_;
  }

 private:
  std::mutex mutex_;
  time_point now_{};
  duration slept_{};
};

}  // namespace detvlm::gateway
