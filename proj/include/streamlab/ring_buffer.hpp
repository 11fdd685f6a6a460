#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <vector>

#include "streamlab/common.hpp"

namespace streamlab {

enum class PushResult { Ok, Full };

// Single-producer single-consumer ring buffer over a fixed slot array.
//
// Producer and consumer positions are monotone counters; the slot index is
// the counter modulo capacity. One slot is always left empty, so a buffer of
// capacity C holds at most C - 1 items. The consumer counter is readable by
// any thread with acquire ordering, which is what the boundary observer
// polls.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(size_t capacity)
      : capacity_(capacity), slots_(capacity) {
    if (capacity < 2) throw InvalidSpec("ring buffer capacity must be >= 2");
  }

  RingBuffer(const RingBuffer&) = delete;
  RingBuffer& operator=(const RingBuffer&) = delete;

  PushResult push(const T& item) {
    uint64_t head = head_.load(std::memory_order_relaxed);
    uint64_t tail = tail_.load(std::memory_order_acquire);
    if (head - tail == capacity_ - 1) return PushResult::Full;
    slots_[head % capacity_] = item;
    head_.store(head + 1, std::memory_order_release);
    return PushResult::Ok;
  }

  // Move-on-success: a Full result leaves the caller's item untouched, so a
  // producer can retry with the same object.
  PushResult push(T&& item) {
    uint64_t head = head_.load(std::memory_order_relaxed);
    uint64_t tail = tail_.load(std::memory_order_acquire);
    if (head - tail == capacity_ - 1) return PushResult::Full;
    slots_[head % capacity_] = std::move(item);
    head_.store(head + 1, std::memory_order_release);
    return PushResult::Ok;
  }

  std::optional<T> pop() {
    uint64_t tail = tail_.load(std::memory_order_relaxed);
    uint64_t head = head_.load(std::memory_order_acquire);
    if (head == tail) return std::nullopt;
    T out = std::move(slots_[tail % capacity_]);
    tail_.store(tail + 1, std::memory_order_release);
    return out;
  }

  // Pops up to max_n items with a single consumer-counter update, so an
  // observer of the counter sees one transition per batch.
  size_t pop_batch(std::vector<T>& out, size_t max_n) {
    uint64_t tail = tail_.load(std::memory_order_relaxed);
    uint64_t head = head_.load(std::memory_order_acquire);
    size_t n = static_cast<size_t>(head - tail);
    if (n > max_n) n = max_n;
    for (size_t i = 0; i < n; ++i)
      out.push_back(std::move(slots_[(tail + i) % capacity_]));
    if (n > 0) tail_.store(tail + n, std::memory_order_release);
    return n;
  }

  size_t size() const {
    uint64_t head = head_.load(std::memory_order_acquire);
    uint64_t tail = tail_.load(std::memory_order_acquire);
    return static_cast<size_t>(head - tail);
  }

  bool empty() const { return size() == 0; }
  bool full() const { return size() == capacity_ - 1; }
  size_t capacity() const { return capacity_; }

  // Monotone producer counter.
  uint64_t pushed() const { return head_.load(std::memory_order_acquire); }

  // Monotone consumer counter. This is the value a boundary observer polls.
  uint64_t popped() const { return tail_.load(std::memory_order_acquire); }

  size_t head_index() const {
    return static_cast<size_t>(pushed() % capacity_);
  }
  size_t tail_index() const {
    return static_cast<size_t>(popped() % capacity_);
  }

  // Producer signals end of stream. No further pushes may follow.
  void close() { closed_.store(true, std::memory_order_release); }
  bool closed() const { return closed_.load(std::memory_order_acquire); }

  // Consumer is done once the stream is closed and fully drained.
  bool exhausted() const { return closed() && empty(); }

 private:
  const size_t capacity_;
  std::vector<T> slots_;
  std::atomic<uint64_t> head_{0};
  std::atomic<uint64_t> tail_{0};
  std::atomic<bool> closed_{false};
};

}  // namespace streamlab
