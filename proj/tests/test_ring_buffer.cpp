#include <deque>
#include <thread>
#include <vector>

#include "doctest.h"
#include "streamlab/ring_buffer.hpp"

using namespace streamlab;

TEST_CASE("ring buffer rejects capacity below two") {
  CHECK_THROWS_AS(RingBuffer<int>(0), InvalidSpec);
  CHECK_THROWS_AS(RingBuffer<int>(1), InvalidSpec);
}

TEST_CASE("capacity-two buffer holds exactly one item") {
  RingBuffer<int> rb(2);
  CHECK(rb.empty());
  CHECK_FALSE(rb.full());
  CHECK(rb.push(7) == PushResult::Ok);
  CHECK(rb.full());
  CHECK(rb.push(8) == PushResult::Full);
  auto v = rb.pop();
  REQUIRE(v.has_value());
  CHECK(*v == 7);
  CHECK(rb.empty());
  CHECK_FALSE(rb.pop().has_value());
}

TEST_CASE("producer and consumer counters are monotone and exact") {
  RingBuffer<int> rb(4);
  CHECK(rb.pushed() == 0);
  CHECK(rb.popped() == 0);
  rb.push(1);
  rb.push(2);
  CHECK(rb.pushed() == 2);
  CHECK(rb.popped() == 0);
  rb.pop();
  CHECK(rb.popped() == 1);
  CHECK(rb.size() == 1);
}

TEST_CASE("pop_batch advances the consumer counter once") {
  RingBuffer<int> rb(8);
  for (int i = 0; i < 5; ++i) rb.push(i);
  std::vector<int> out;
  CHECK(rb.pop_batch(out, 3) == 3);
  CHECK(rb.popped() == 3);
  CHECK(out == std::vector<int>{0, 1, 2});
  CHECK(rb.pop_batch(out, 10) == 2);
  CHECK(rb.popped() == 5);
  CHECK(rb.pop_batch(out, 10) == 0);
  CHECK(rb.popped() == 5);
}

TEST_CASE("close marks the stream exhausted once drained") {
  RingBuffer<int> rb(3);
  rb.push(1);
  rb.close();
  CHECK(rb.closed());
  CHECK_FALSE(rb.exhausted());
  rb.pop();
  CHECK(rb.exhausted());
}

TEST_CASE("randomized single-thread interleaving matches a reference queue") {
  SplitMix64 rng(2024);
  for (int round = 0; round < 20; ++round) {
    size_t cap = 2 + rng.uniform_int(0, 14);
    RingBuffer<uint64_t> rb(cap);
    std::deque<uint64_t> ref;
    uint64_t next_val = 0;
    for (int step = 0; step < 5000; ++step) {
      CHECK(rb.size() == ref.size());
      CHECK(rb.empty() == ref.empty());
      CHECK(rb.full() == (ref.size() == cap - 1));
      if (rng.bernoulli(0.5)) {
        PushResult r = rb.push(next_val);
        if (ref.size() == cap - 1) {
          CHECK(r == PushResult::Full);
        } else {
          CHECK(r == PushResult::Ok);
          ref.push_back(next_val);
          ++next_val;
        }
      } else {
        auto got = rb.pop();
        if (ref.empty()) {
          CHECK_FALSE(got.has_value());
        } else {
          REQUIRE(got.has_value());
          CHECK(*got == ref.front());
          ref.pop_front();
        }
      }
    }
  }
}

TEST_CASE("two threads transfer every item in order") {
  constexpr uint64_t kN = 200000;
  RingBuffer<uint64_t> rb(16);
  std::vector<uint64_t> received;
  received.reserve(kN);
  std::thread consumer([&] {
    while (received.size() < kN) {
      auto v = rb.pop();
      if (v) received.push_back(*v);
    }
  });
  for (uint64_t i = 0; i < kN; ++i)
    while (rb.push(i) == PushResult::Full) std::this_thread::yield();
  consumer.join();
  REQUIRE(received.size() == kN);
  for (uint64_t i = 0; i < kN; ++i) REQUIRE(received[i] == i);
  CHECK(rb.pushed() == kN);
  CHECK(rb.popped() == kN);
}
