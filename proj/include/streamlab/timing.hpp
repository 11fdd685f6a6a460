#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace streamlab {

// Monotone cycle source. Measured runs read the hardware timestamp counter
// (or a steady-clock fallback); simulated runs use a hand-advanced clock so
// tests control time exactly.
class CycleCounter {
 public:
  virtual ~CycleCounter() = default;
  virtual uint64_t now() const = 0;
};

class VirtualClock : public CycleCounter {
 public:
  uint64_t now() const override { return t_.load(std::memory_order_acquire); }
  void advance(uint64_t delta) { t_.fetch_add(delta, std::memory_order_acq_rel); }
  void set(uint64_t t) { t_.store(t, std::memory_order_release); }

 private:
  std::atomic<uint64_t> t_{0};
};

#if defined(__x86_64__) || defined(_M_X64)
#define STREAMLAB_HAS_TSC 1
class TscCounter : public CycleCounter {
 public:
  uint64_t now() const override;
};
#endif

// steady_clock nanoseconds scaled to nominal cycles.
class SteadyCycleCounter : public CycleCounter {
 public:
  explicit SteadyCycleCounter(double cycles_per_ns = 1.0)
      : cycles_per_ns_(cycles_per_ns),
        t0_(std::chrono::steady_clock::now()) {}

  uint64_t now() const override {
    auto dt = std::chrono::steady_clock::now() - t0_;
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(dt).count();
    return uint64_t(double(ns) * cycles_per_ns_);
  }

 private:
  double cycles_per_ns_;
  std::chrono::steady_clock::time_point t0_;
};

// TSC where available, steady clock otherwise.
std::unique_ptr<CycleCounter> make_hardware_counter();

}  // namespace streamlab
