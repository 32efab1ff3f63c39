#pragma once

#include <atomic>
#include <chrono>

namespace facdash {

using Timestamp = std::chrono::sys_seconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override {
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  }
};

// Test clock; starts at a fixed instant and only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{std::chrono::seconds{1'700'000'000}})
      : seconds_(start.time_since_epoch().count()) {}

  Timestamp now() const override { return Timestamp{std::chrono::seconds{seconds_.load()}}; }
  void advance(std::chrono::seconds by) { seconds_ += by.count(); }
  void set(Timestamp t) { seconds_ = t.time_since_epoch().count(); }

 private:
  std::atomic<long long> seconds_;
};

}  // namespace facdash
